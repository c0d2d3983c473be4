#pragma once

// Posterior predictive checks: one replicated outcome vector per retained
// draw, scored by the signed difference between observed and simulated
// categories.

#include "bridgeord/draws.hpp"
#include "bridgeord/model.hpp"
#include "bridgeord/random.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace bridgeord {

/// Draws Y_sim for every observation from the category probabilities implied
/// by `cp`, reusing the draw's own random effects.
std::vector<int> simulate_replicate(const ConstrainedParams& cp, const Dataset& data, const ModelSpec& spec,
                                    RandomStream& rng);

/// observed - simulated, both in 1..n_categories (1 = best category). With three
/// categories: -2 for observed 1 / simulated 3, +2 for observed 3 / simulated 1.
int diff_code(int observed, int simulated, int n_categories);

struct DiffRow {
  int code = 0;
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
};

struct DiffTable {
  std::vector<DiffRow> rows;             // codes ascending, always covering -2..2
  Eigen::MatrixXd replicate_percent;     // replicate x code, each row sums to 100
};

/// Percentages of each diff code across replicates from a list of simulated
/// outcome vectors.
DiffTable tabulate_diffs(const std::vector<int>& observed, const std::vector<std::vector<int>>& replicates,
                         int n_categories);

/// One replicate per retained draw (chain-major order); replicate l uses
/// RandomStream(seed, l).
DiffTable ppc_report(const DrawsStore& store, const Dataset& data, const ModelSpec& spec, std::uint64_t seed);

/// Plain-text table with one row per code and mean / sd / 2.5% / 97.5% columns.
std::string format_diff_table(const DiffTable& table);

}  // namespace bridgeord
