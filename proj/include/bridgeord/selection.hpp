#pragma once

// WAIC, LPML (harmonic-mean CPO) and DIC from pointwise log-likelihoods that
// condition on each draw's random effects.

#include "bridgeord/draws.hpp"
#include "bridgeord/model.hpp"

#include <Eigen/Dense>

#include <optional>

namespace bridgeord {

/// M x N matrix of log [Y_n | draw l], plus the plug-in row evaluated at the
/// posterior means of the constrained parameters and effects.
struct PointwiseLogLik {
  Eigen::MatrixXd draws;
  std::optional<Eigen::RowVectorXd> plugin;

  int n_draws() const noexcept { return static_cast<int>(draws.rows()); }
  int n_obs() const noexcept { return static_cast<int>(draws.cols()); }
};

struct WaicResult {
  double waic;
  double lppd;
  double rho;  // effective number of parameters
};

struct LpmlResult {
  double lpml;
  Eigen::VectorXd cpo;
};

struct DicResult {
  double dic;
  double dbar;
  double dhat;
};

/// lppd = sum_n log mean_l exp(ll[l,n]);  rho = sum_n var_l ll[l,n] (1/M);
/// waic = -2 (lppd - rho). Needs M >= 2.
WaicResult waic(const PointwiseLogLik& pll);

/// CPO_n = 1 / mean_l exp(-ll[l,n]); lpml = sum_n log CPO_n. Throws
/// ValidationError naming the observation if a CPO is not finite.
LpmlResult lpml(const PointwiseLogLik& pll);

/// Dbar = mean_l(-2 sum_n ll[l,n]); Dhat = -2 sum_n plugin[n]; dic = 2 Dbar - Dhat.
DicResult dic(const PointwiseLogLik& pll);

struct CriteriaReport {
  WaicResult waic;
  LpmlResult lpml;
  DicResult dic;
};

CriteriaReport criteria(const PointwiseLogLik& pll);

/// Evaluates the pointwise log-likelihood of every retained draw (chain-major)
/// and the plug-in row at posterior means.
PointwiseLogLik pointwise_from_store(const DrawsStore& store, const Dataset& data, const ModelSpec& spec);

}  // namespace bridgeord
