#include "bridgeord/ppc.hpp"

#include "bridgeord/bridge.hpp"
#include "bridgeord/errors.hpp"
#include "bridgeord/posterior.hpp"
#include "bridgeord/summary.hpp"

#include <algorithm>
#include <cstdio>
#include <string>

namespace bridgeord {

std::vector<int> simulate_replicate(const ConstrainedParams& cp, const Dataset& data, const ModelSpec& spec,
                                    RandomStream& rng) {
  if ((spec.has_region_effects() && cp.u.size() != data.n_regions) ||
      (spec.has_family_effects() && cp.v.size() != data.n_families())) {
    throw ValidationError("draw lacks the random effects required by the model level");
  }
  std::vector<int> out(static_cast<std::size_t>(data.n_obs()));
  const auto n_thr = cp.alpha_c.size();
  for (int k = 0; k < data.n_obs(); ++k) {
    const int f = data.obs_family[static_cast<std::size_t>(k)];
    const double eta = linear_predictor(cp, data.row(k), data.family_region[static_cast<std::size_t>(f)], f, spec);
    const double u = rng.uniform();
    int y = static_cast<int>(n_thr) + 1;
    for (Eigen::Index a = 0; a < n_thr; ++a) {
      if (u <= logistic(cp.alpha_c[a] - eta)) {
        y = static_cast<int>(a) + 1;
        break;
      }
    }
    out[static_cast<std::size_t>(k)] = y;
  }
  return out;
}

int diff_code(int observed, int simulated, int n_categories) {
  if (observed < 1 || observed > n_categories || simulated < 1 || simulated > n_categories) {
    throw ValidationError("diff code needs categories in 1.." + std::to_string(n_categories));
  }
  return observed - simulated;
}

DiffTable tabulate_diffs(const std::vector<int>& observed, const std::vector<std::vector<int>>& replicates,
                         int n_categories) {
  if (observed.empty()) throw ValidationError("no observations to compare");
  const int span = std::max(2, n_categories - 1);
  const int n_codes = 2 * span + 1;
  DiffTable table;
  table.replicate_percent = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(replicates.size()), n_codes);
  const double scale = 100.0 / static_cast<double>(observed.size());
  for (std::size_t l = 0; l < replicates.size(); ++l) {
    if (replicates[l].size() != observed.size()) throw ValidationError("replicate length mismatch");
    std::vector<long> counts(static_cast<std::size_t>(n_codes), 0);
    for (std::size_t k = 0; k < observed.size(); ++k) {
      ++counts[static_cast<std::size_t>(diff_code(observed[k], replicates[l][k], n_categories) + span)];
    }
    for (int c = 0; c < n_codes; ++c) {
      table.replicate_percent(static_cast<Eigen::Index>(l), c) = scale * static_cast<double>(counts[static_cast<std::size_t>(c)]);
    }
  }
  for (int c = 0; c < n_codes; ++c) {
    DiffRow row;
    row.code = c - span;
    if (!replicates.empty()) {
      const Eigen::VectorXd col = table.replicate_percent.col(c);
      const QuantitySummary s = summarize_values(std::to_string(row.code), {col.data(), col.data() + col.size()});
      row.mean = s.mean;
      row.sd = s.sd;
      row.q025 = s.q025;
      row.q975 = s.q975;
    }
    table.rows.push_back(row);
  }
  return table;
}

DiffTable ppc_report(const DrawsStore& store, const Dataset& data, const ModelSpec& spec, std::uint64_t seed) {
  data.validate(spec);
  if (store.total_draws() == 0) throw ValidationError("no retained draws");
  const DrawColumns cols(store, spec, data.n_regions, data.n_families());
  std::vector<std::vector<int>> replicates;
  replicates.reserve(static_cast<std::size_t>(store.total_draws()));
  std::uint64_t l = 0;
  for (int c = 0; c < store.n_chains(); ++c) {
    for (int i = 0; i < store.n_retained(); ++i) {
      RandomStream rng(seed, l++);
      replicates.push_back(simulate_replicate(cols.params(store, c, i), data, spec, rng));
    }
  }
  return tabulate_diffs(data.outcome, replicates, spec.n_categories);
}

std::string format_diff_table(const DiffTable& table) {
  std::string out = "Diff       Mean       sd       2.5%      97.5%\n";
  char line[128];
  for (const auto& r : table.rows) {
    std::snprintf(line, sizeof(line), "%4d %10.2f %8.2f %10.2f %10.2f\n", r.code, r.mean, r.sd, r.q025, r.q975);
    out += line;
  }
  return out;
}

}  // namespace bridgeord
