#include "bridgeord/bridge.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bridgeord {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kBoundaryGuard = 1e-12;

void check_phi(double phi, const char* what) {
  if (!(phi > kBoundaryGuard && phi < 1.0 - kBoundaryGuard)) {
    throw std::domain_error(std::string(what) + " must lie strictly inside (0, 1), got " +
                            std::to_string(phi));
  }
}

void check_finite(double x) {
  if (!std::isfinite(x)) throw std::domain_error("bridge density evaluated at non-finite x");
}

// cosh(y) + c rewritten as exp(|y|)/2 * (1 + e^2 + 2ce), e = exp(-|y|), so that
// |y| beyond the exp overflow point stays finite in log space.
struct CoshPlusCos {
  double log_value;  // log(cosh(y) + c)
  double tanh_like;  // sinh(y) / (cosh(y) + c)
  double inverse;    // 1 / (cosh(y) + c)
};

CoshPlusCos cosh_plus_cos(double y, double c) {
  const double a = std::abs(y);
  const double e = std::exp(-a);
  const double inner = e * e + 2.0 * c * e;  // (1 + inner) > 0 for |c| < 1
  CoshPlusCos out;
  out.log_value = a - std::numbers::ln2 + std::log1p(inner);
  out.tanh_like = std::copysign((1.0 - e * e) / (1.0 + inner), y);
  out.inverse = 2.0 * e / (1.0 + inner);
  return out;
}

}  // namespace

BridgeParam::BridgeParam(double phi) : phi_(phi) { check_phi(phi, "Bridge phi"); }

ModifiedBridgeParam::ModifiedBridgeParam(double phi_y, double phi_z)
    : phi_y_(phi_y), phi_z_(phi_z) {
  check_phi(phi_y, "Modified Bridge phi_y");
  check_phi(phi_z, "Modified Bridge phi_z");
}

double bridge_log_pdf(double x, BridgeParam p) {
  check_finite(x);
  const double phi = p.phi();
  return std::log(std::sin(phi * kPi)) - std::log(2.0 * kPi) -
         cosh_plus_cos(phi * x, std::cos(phi * kPi)).log_value;
}

BridgeGradient bridge_log_pdf_grad(double x, BridgeParam p) {
  check_finite(x);
  const double phi = p.phi();
  const double s = std::sin(phi * kPi);
  const double c = std::cos(phi * kPi);
  const auto d = cosh_plus_cos(phi * x, c);
  BridgeGradient g;
  g.d_x = -phi * d.tanh_like;
  // d/dphi [log sin(phi pi) - log(cosh(phi x) + cos(phi pi))]
  g.d_phi = kPi * c / s - x * d.tanh_like + kPi * s * d.inverse;
  return g;
}

double bridge_variance(BridgeParam p) {
  const double phi = p.phi();
  return kPi * kPi / 3.0 * (1.0 / (phi * phi) - 1.0);
}

double bridge_sd(BridgeParam p) { return std::sqrt(bridge_variance(p)); }

double bridge_cdf(double x, BridgeParam p) {
  if (std::isnan(x)) throw std::domain_error("bridge cdf evaluated at NaN");
  const double phi = p.phi();
  return 0.5 + std::atan(std::tan(0.5 * phi * kPi) * std::tanh(0.5 * phi * x)) / (phi * kPi);
}

double bridge_quantile(double u, BridgeParam p) {
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("bridge quantile needs u in (0, 1)");
  const double phi = p.phi();
  return std::log(std::sin(phi * kPi * u) / std::sin(phi * kPi * (1.0 - u))) / phi;
}

double bridge_sample(BridgeParam p, RandomStream& rng) { return bridge_quantile(rng.uniform(), p); }

double modified_bridge_log_pdf(double x, ModifiedBridgeParam p) {
  check_finite(x);
  return std::log(p.phi_z()) + bridge_log_pdf(p.phi_z() * x, BridgeParam(p.phi_y()));
}

ModifiedBridgeGradient modified_bridge_log_pdf_grad(double x, ModifiedBridgeParam p) {
  const auto inner = bridge_log_pdf_grad(p.phi_z() * x, BridgeParam(p.phi_y()));
  ModifiedBridgeGradient g;
  g.d_x = p.phi_z() * inner.d_x;
  g.d_phi_y = inner.d_phi;
  g.d_phi_z = 1.0 / p.phi_z() + x * inner.d_x;
  return g;
}

double modified_bridge_variance(ModifiedBridgeParam p) {
  return bridge_variance(BridgeParam(p.phi_y())) / (p.phi_z() * p.phi_z());
}

double modified_bridge_cdf(double x, ModifiedBridgeParam p) {
  return bridge_cdf(p.phi_z() * x, BridgeParam(p.phi_y()));
}

double modified_bridge_quantile(double u, ModifiedBridgeParam p) {
  return bridge_quantile(u, BridgeParam(p.phi_y())) / p.phi_z();
}

double modified_bridge_sample(ModifiedBridgeParam p, RandomStream& rng) {
  return bridge_sample(BridgeParam(p.phi_y()), rng) / p.phi_z();
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_logistic(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

}  // namespace bridgeord
