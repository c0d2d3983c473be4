#pragma once

// Comma-delimited dataset files: a header row `region,family,<outcome>,<covariates...>`
// followed by one row per person. Region and family identifiers are arbitrary
// strings; a family identifier may appear under one region only.

#include "bridgeord/encoding.hpp"
#include "bridgeord/model.hpp"

#include <map>
#include <string>
#include <vector>

namespace bridgeord {

struct LoadReport {
  int n_regions = 0;
  int n_families = 0;
  int n_obs = 0;
  std::vector<std::pair<std::string, long>> outcome_counts;
  /// Per categorical column: level -> count, in declared level order.
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, long>>>> level_counts;
  /// Per centered numeric column: the subtracted mean.
  std::vector<std::pair<std::string, double>> centering;
};

struct LoadResult {
  Dataset data;
  LoadReport report;
};

/// Parses, validates and densely reindexes a dataset. Regions keep their order
/// of first appearance, families are grouped under their region, and persons
/// keep file order within a family. Errors carry 1-based file line numbers.
LoadResult parse_dataset(std::string_view body, const EncodingPlan& plan, const ModelSpec& spec);
LoadResult load_dataset(const std::string& path, const EncodingPlan& plan, const ModelSpec& spec);

std::string format_load_report(const LoadReport& report);

/// Writes integer outcome codes and raw covariate values under the dataset's
/// covariate names (x1..xp when unnamed), together with a matching plan.
std::string format_dataset(const Dataset& data);
EncodingPlan numeric_plan(const Dataset& data, int n_categories);

}  // namespace bridgeord
