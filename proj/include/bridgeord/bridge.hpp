#pragma once

// Bridge and Modified Bridge distributions for the logit link, plus the
// stable logistic helpers the rest of the library builds on.
//
// Bridge(phi) is the random-intercept law under which integrating a logistic
// response over the intercept yields another logistic response with slope
// scaled by phi:
//
//   f(x | phi) = sin(phi*pi) / (2*pi * (cosh(phi*x) + cos(phi*pi))),  0 < phi < 1.
//
// The Modified Bridge law is that of Y / phi_z with Y ~ Bridge(phi_y).

#include "bridgeord/random.hpp"

namespace bridgeord {

/// Concentration parameter of a Bridge law, validated to lie strictly in (0, 1).
/// Values within 1e-12 of either endpoint are rejected with std::domain_error.
class BridgeParam {
 public:
  explicit BridgeParam(double phi);
  double phi() const noexcept { return phi_; }

 private:
  double phi_;
};

class ModifiedBridgeParam {
 public:
  ModifiedBridgeParam(double phi_y, double phi_z);
  double phi_y() const noexcept { return phi_y_; }
  double phi_z() const noexcept { return phi_z_; }

 private:
  double phi_y_;
  double phi_z_;
};

struct BridgeGradient {
  double d_x;
  double d_phi;
};

struct ModifiedBridgeGradient {
  double d_x;
  double d_phi_y;
  double d_phi_z;
};

/// Natural log of the Bridge density. Finite for every finite x.
double bridge_log_pdf(double x, BridgeParam p);
/// Partial derivatives of bridge_log_pdf in x and phi.
BridgeGradient bridge_log_pdf_grad(double x, BridgeParam p);
/// pi^2/3 * (phi^-2 - 1).
double bridge_variance(BridgeParam p);
double bridge_sd(BridgeParam p);
double bridge_cdf(double x, BridgeParam p);
/// Inverse cdf; `u` must lie in the open interval (0, 1).
double bridge_quantile(double u, BridgeParam p);
double bridge_sample(BridgeParam p, RandomStream& rng);

double modified_bridge_log_pdf(double x, ModifiedBridgeParam p);
ModifiedBridgeGradient modified_bridge_log_pdf_grad(double x, ModifiedBridgeParam p);
/// pi^2 / (3 phi_z^2) * (phi_y^-2 - 1).
double modified_bridge_variance(ModifiedBridgeParam p);
double modified_bridge_cdf(double x, ModifiedBridgeParam p);
double modified_bridge_quantile(double u, ModifiedBridgeParam p);
double modified_bridge_sample(ModifiedBridgeParam p, RandomStream& rng);

/// 1 / (1 + exp(-x)), branch-split at zero so neither side overflows.
double logistic(double x);
/// log(logistic(x)) without cancellation in either tail.
double log_logistic(double x);

}  // namespace bridgeord
