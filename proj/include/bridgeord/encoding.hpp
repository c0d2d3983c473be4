#pragma once

// Covariate encoding plans, read from a line-oriented sidecar file:
//
//   # comment
//   y      = outcome(good, fair, poor)        ordered labels, best first
//   y      = outcome(3)                       integer codes 1..3
//   gender = categorical(Male*, Female)       '*' marks the reference level
//   income = numeric(log)                     natural log before use
//   age    = numeric                          options: log, center
//
// Covariate columns enter the design matrix in declaration order; a
// categorical column contributes one indicator per non-reference level.

#include <string>
#include <string_view>
#include <vector>

namespace bridgeord {

struct OutcomeEncoding {
  std::string column;
  std::vector<std::string> labels;  // empty when outcomes are integer codes
  int n_categories = 0;

  /// Maps a cell to 1..n_categories; throws ValidationError for unknown values.
  int code(std::string_view cell) const;
};

struct CovariateEncoding {
  enum class Kind { numeric, categorical };

  std::string column;
  Kind kind = Kind::numeric;
  std::vector<std::string> levels;  // categorical only, declared order
  std::string reference;            // categorical only
  bool log = false;                 // numeric only
  bool center = false;              // numeric only

  int width() const;
  std::vector<std::string> design_names() const;
};

struct EncodingPlan {
  OutcomeEncoding outcome;
  std::vector<CovariateEncoding> covariates;

  int width() const;
  std::vector<std::string> design_names() const;
  const CovariateEncoding* find(std::string_view column) const;

  static EncodingPlan parse(std::string_view text);
  static EncodingPlan load(const std::string& path);
  std::string to_text() const;
};

/// Reference-cell dummy coding: all zeros for the reference level, a single
/// one at the level's slot otherwise.
std::vector<double> encode(std::string_view value, const CovariateEncoding& column);

}  // namespace bridgeord
