#include "bridgeord/diagnostics.hpp"

#include "bridgeord/errors.hpp"

#include <algorithm>
#include <cmath>

namespace bridgeord {
namespace {

double mean(const std::vector<double>& x, std::size_t begin, std::size_t end) {
  double s = 0.0;
  for (std::size_t i = begin; i < end; ++i) s += x[i];
  return s / static_cast<double>(end - begin);
}

double variance(const std::vector<double>& x, std::size_t begin, std::size_t end) {
  const double m = mean(x, begin, end);
  double s = 0.0;
  for (std::size_t i = begin; i < end; ++i) s += (x[i] - m) * (x[i] - m);
  return s / static_cast<double>(end - begin - 1);
}

std::size_t common_length(const ChainDraws& chains) {
  if (chains.empty()) throw ValidationError("no chains supplied");
  const std::size_t n = chains.front().size();
  for (const auto& c : chains) {
    if (c.size() != n) throw ValidationError("chains have unequal lengths");
  }
  return n;
}

}  // namespace

std::optional<double> rhat(const ChainDraws& chains) {
  const std::size_t n_full = common_length(chains);
  if (chains.size() < 2) throw ValidationError("R-hat needs at least 2 chains");
  if (n_full < 4) throw ValidationError("R-hat needs at least 4 draws per chain");
  const std::size_t n = n_full / 2;

  // Sequences are [0, n) and [n_full - n, n_full) of every chain; an odd
  // middle draw is dropped.
  std::vector<double> seq_means;
  double within = 0.0;
  for (const auto& c : chains) {
    for (std::size_t begin : {std::size_t{0}, n_full - n}) {
      seq_means.push_back(mean(c, begin, begin + n));
      within += variance(c, begin, begin + n);
    }
  }
  const double m = static_cast<double>(seq_means.size());
  within /= m;
  const double grand = mean(seq_means, 0, seq_means.size());
  double between = 0.0;
  for (double sm : seq_means) between += (sm - grand) * (sm - grand);
  between *= static_cast<double>(n) / (m - 1.0);
  if (!(within > 0.0)) return std::nullopt;
  const double dn = static_cast<double>(n);
  const double var_plus = (dn - 1.0) / dn * within + between / dn;
  return std::sqrt(var_plus / within);
}

std::optional<double> ess(const ChainDraws& chains) {
  const std::size_t n = common_length(chains);
  const std::size_t m = chains.size();
  if (n < 4) throw ValidationError("ESS needs at least 4 draws per chain");

  std::vector<double> chain_mean(m);
  for (std::size_t c = 0; c < m; ++c) chain_mean[c] = mean(chains[c], 0, n);

  // Autocovariance averaged over chains, computed lazily lag by lag.
  std::vector<double> mean_acov;
  auto acov = [&](std::size_t lag) {
    while (mean_acov.size() <= lag) {
      const std::size_t t = mean_acov.size();
      double total = 0.0;
      for (std::size_t c = 0; c < m; ++c) {
        const auto& x = chains[c];
        double s = 0.0;
        for (std::size_t i = 0; i + t < n; ++i) s += (x[i] - chain_mean[c]) * (x[i + t] - chain_mean[c]);
        total += s / static_cast<double>(n);
      }
      mean_acov.push_back(total / static_cast<double>(m));
    }
    return mean_acov[lag];
  };

  const double dn = static_cast<double>(n);
  const double mean_var = acov(0) * dn / (dn - 1.0);
  double var_plus = mean_var * (dn - 1.0) / dn;
  if (m > 1) var_plus += variance(chain_mean, 0, m);
  if (!(var_plus > 0.0) || !(mean_var > 0.0)) return std::nullopt;

  std::vector<double> rho(n, 0.0);
  rho[0] = 1.0;
  double rho_even = 1.0;
  double rho_odd = 1.0 - (mean_var - acov(1)) / var_plus;
  rho[1] = rho_odd;
  std::size_t t = 1;
  while (t + 5 < n && rho_even + rho_odd > 0.0) {
    rho_even = 1.0 - (mean_var - acov(t + 1)) / var_plus;
    rho_odd = 1.0 - (mean_var - acov(t + 2)) / var_plus;
    if (rho_even + rho_odd >= 0.0) {
      rho[t + 1] = rho_even;
      rho[t + 2] = rho_odd;
    }
    t += 2;
  }
  const std::size_t max_t = t;
  if (rho_even > 0.0 && max_t + 1 < n) rho[max_t + 1] = rho_even;

  // Enforce a monotone sequence of pair sums.
  for (std::size_t s = 1; s + 3 <= max_t; s += 2) {
    if (rho[s + 1] + rho[s + 2] > rho[s - 1] + rho[s]) {
      rho[s + 1] = (rho[s - 1] + rho[s]) / 2.0;
      rho[s + 2] = rho[s + 1];
    }
  }

  const double total = static_cast<double>(m) * dn;
  double tau = -1.0;
  for (std::size_t s = 0; s <= max_t && s < n; ++s) tau += 2.0 * rho[s];
  if (max_t + 1 < n) tau += rho[max_t + 1];
  tau = std::max(tau, 1.0 / std::log10(total));
  return std::min(total / tau, total);
}

std::optional<double> ess(const std::vector<double>& draws) { return ess(ChainDraws{draws}); }

}  // namespace bridgeord
