#include "bridgeord/summary.hpp"

#include "bridgeord/diagnostics.hpp"
#include "bridgeord/errors.hpp"

#include <algorithm>
#include <cmath>

namespace bridgeord {

double nearest_rank(const std::vector<double>& sorted, double prob) {
  if (sorted.empty()) throw ValidationError("percentile of an empty sample");
  const double n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(prob * n));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

QuantitySummary summarize_values(std::string name, std::vector<double> values) {
  if (values.empty()) throw ValidationError("no retained draws for " + name);
  QuantitySummary s;
  s.name = std::move(name);
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  std::sort(values.begin(), values.end());
  s.q025 = nearest_rank(values, 0.025);
  s.q975 = nearest_rank(values, 0.975);
  return s;
}

QuantitySummary summarize(const DrawsStore& store, int col) {
  return summarize_values(store.names()[static_cast<std::size_t>(col)], store.pooled(col));
}

QuantityDiagnostics diagnose(const DrawsStore& store, int col) {
  QuantityDiagnostics d;
  d.name = store.names()[static_cast<std::size_t>(col)];
  const auto chains = store.by_chain(col);
  if (store.n_chains() >= 2 && store.n_retained() >= 4) d.rhat = rhat(chains);
  if (store.n_retained() >= 4) d.ess = ess(chains);
  return d;
}

}  // namespace bridgeord
