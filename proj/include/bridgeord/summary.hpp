#pragma once

#include "bridgeord/draws.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bridgeord {

/// Nearest-rank percentile of already sorted values: the ceil(prob * n)-th
/// smallest value (clamped to the first/last element).
double nearest_rank(const std::vector<double>& sorted, double prob);

struct QuantitySummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;  // n - 1 denominator
  double q025 = 0.0;
  double q975 = 0.0;
};

QuantitySummary summarize_values(std::string name, std::vector<double> values);

struct QuantityDiagnostics {
  std::string name;
  std::optional<double> rhat;
  std::optional<double> ess;
};

/// Summary row for one quantity of a store, pooling all chains.
QuantitySummary summarize(const DrawsStore& store, int col);
/// R-hat (when the store has >= 2 chains of >= 4 draws) and ESS for one quantity.
QuantityDiagnostics diagnose(const DrawsStore& store, int col);

}  // namespace bridgeord
