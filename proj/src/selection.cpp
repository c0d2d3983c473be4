#include "bridgeord/selection.hpp"

#include "bridgeord/errors.hpp"
#include "bridgeord/posterior.hpp"

#include <cmath>
#include <string>

namespace bridgeord {
namespace {

double log_mean_exp(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double m = x.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((x.array() - m).exp().sum() / static_cast<double>(x.size()));
}

void check_shape(const PointwiseLogLik& pll, int min_draws) {
  if (pll.n_draws() < min_draws) {
    throw ValidationError("criterion needs at least " + std::to_string(min_draws) + " draws, got " +
                          std::to_string(pll.n_draws()));
  }
  if (pll.n_obs() < 1) throw ValidationError("criterion needs at least one observation");
}

}  // namespace

WaicResult waic(const PointwiseLogLik& pll) {
  check_shape(pll, 2);
  WaicResult r{0.0, 0.0, 0.0};
  const double m = pll.n_draws();
  for (int n = 0; n < pll.n_obs(); ++n) {
    const auto col = pll.draws.col(n);
    r.lppd += log_mean_exp(col);
    const double mean = col.mean();
    r.rho += (col.array() - mean).square().sum() / m;
  }
  r.waic = -2.0 * (r.lppd - r.rho);
  return r;
}

LpmlResult lpml(const PointwiseLogLik& pll) {
  check_shape(pll, 1);
  LpmlResult r{0.0, Eigen::VectorXd(pll.n_obs())};
  for (int n = 0; n < pll.n_obs(); ++n) {
    const Eigen::VectorXd neg = -pll.draws.col(n);
    const double log_cpo = -log_mean_exp(neg);
    if (!std::isfinite(log_cpo)) {
      throw ValidationError("CPO of observation " + std::to_string(n + 1) + " is not finite");
    }
    r.cpo[n] = std::exp(log_cpo);
    r.lpml += log_cpo;
  }
  return r;
}

DicResult dic(const PointwiseLogLik& pll) {
  check_shape(pll, 1);
  if (!pll.plugin) throw ValidationError("DIC needs the plug-in log-likelihood row");
  if (pll.plugin->size() != pll.n_obs()) throw ValidationError("plug-in row has the wrong width");
  DicResult r{0.0, 0.0, 0.0};
  r.dbar = -2.0 * pll.draws.rowwise().sum().mean();
  r.dhat = -2.0 * pll.plugin->sum();
  r.dic = 2.0 * r.dbar - r.dhat;
  return r;
}

CriteriaReport criteria(const PointwiseLogLik& pll) { return {waic(pll), lpml(pll), dic(pll)}; }

PointwiseLogLik pointwise_from_store(const DrawsStore& store, const Dataset& data, const ModelSpec& spec) {
  data.validate(spec);
  if (store.total_draws() == 0) throw ValidationError("no retained draws");
  const DrawColumns cols(store, spec, data.n_regions, data.n_families());
  PointwiseLogLik pll;
  pll.draws.resize(store.total_draws(), data.n_obs());
  int row = 0;
  for (int c = 0; c < store.n_chains(); ++c) {
    for (int i = 0; i < store.n_retained(); ++i) {
      pll.draws.row(row++) = pointwise_log_likelihood(cols.params(store, c, i), data, spec).transpose();
    }
  }
  pll.plugin = pointwise_log_likelihood(cols.posterior_mean(store), data, spec).transpose();
  return pll;
}

}  // namespace bridgeord
