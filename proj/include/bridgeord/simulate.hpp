#pragma once

// Synthetic data from known parameters, for recovery experiments.

#include "bridgeord/draws.hpp"
#include "bridgeord/model.hpp"
#include "bridgeord/random.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace bridgeord {

struct CovariateLaw {
  enum class Kind { normal, bernoulli };
  Kind kind = Kind::normal;
  double a = 0.0;  // normal: mean; bernoulli: success probability
  double b = 1.0;  // normal: sd

  std::string to_text() const;
};

/// Generator ground truth. Effects are drawn as V ~ Bridge(phi_v) and
/// U ~ ModifiedBridge(phi_ustar, phi_v) for the blocks the level includes.
struct TrueParams {
  Level level = Level::three_level;
  Eigen::VectorXd alpha_c;
  Eigen::VectorXd beta_c;
  double phi_ustar = 1.0;
  double phi_v = 1.0;
  int n_regions = 1;
  std::vector<int> families_per_region;  // one entry per region
  std::vector<int> family_sizes;         // each family's size is drawn uniformly from this list
  std::vector<CovariateLaw> covariates;  // one law per column of beta_c

  ModelSpec spec() const;
  void validate() const;  // throws ValidationError
  MarginalParams marginal() const;

  /// Line-oriented `key = value` form, see parse().
  std::string to_text() const;
  /// Keys: level, alpha_c, beta_c, phi_ustar, phi_v, regions,
  /// families_per_region (one value or one per region), family_sizes,
  /// covariates (normal(mean, sd) / bernoulli(p) per column; default normal(0, 1)).
  static TrueParams parse(std::string_view body);
};

struct GeneratedData {
  Dataset data;
  Eigen::VectorXd u;  // empty unless the level has region effects
  Eigen::VectorXd v;  // empty unless the level has family effects
};

GeneratedData generate(const TrueParams& truth, RandomStream& rng);

struct RecoveryRow {
  std::string name;
  double truth = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
  bool covered = false;
};

/// Checks each true marginal parameter and phi against the central 95%
/// posterior interval of the matching quantity in `store`.
std::vector<RecoveryRow> score_recovery(const DrawsStore& store, const TrueParams& truth);

}  // namespace bridgeord
