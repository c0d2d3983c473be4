#include "bridgeord/model.hpp"

#include "bridgeord/bridge.hpp"
#include "bridgeord/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bridgeord {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPriorScale = 5.0;
const double kLogProbFloor = std::log(1e-300);

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// log F(z) and F(-z) = 1 - F(z) from a single exponential.
struct LogisticPair {
  double log_f;
  double f_neg;
};

LogisticPair logistic_pair(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return {-std::log1p(e), e / (1.0 + e)};
  }
  const double e = std::exp(z);
  return {z - std::log1p(e), 1.0 / (1.0 + e)};
}

struct CategoryTerm {
  double value;
  double d_upper;  // d/d alpha_y
  double d_lower;  // d/d alpha_{y-1}
};

CategoryTerm category_term(int y, double eta, const Eigen::VectorXd& alpha) {
  const int n_thr = static_cast<int>(alpha.size());
  CategoryTerm t{0.0, 0.0, 0.0};
  if (y == 1) {
    const auto up = logistic_pair(alpha[0] - eta);
    t.value = up.log_f;
    t.d_upper = up.f_neg;
  } else if (y == n_thr + 1) {
    const auto lo = logistic_pair(eta - alpha[n_thr - 1]);  // log(1 - F(b)) = log F(-b)
    t.value = lo.log_f;
    t.d_lower = -lo.f_neg;
  } else {
    // F(a) - F(b) = F(a) * F(-b) * (1 - exp(b - a))
    const double a = alpha[y - 1] - eta;
    const double b = alpha[y - 2] - eta;
    const auto up = logistic_pair(a);
    const auto lo = logistic_pair(-b);
    const double gap = std::expm1(a - b);
    t.value = up.log_f + lo.log_f + std::log(-std::expm1(b - a));
    t.d_upper = up.f_neg + 1.0 / gap;
    t.d_lower = -lo.f_neg - 1.0 / gap;
  }
  if (!(t.value >= kLogProbFloor)) {
    t.value = kLogProbFloor;
    t.d_upper = 0.0;
    t.d_lower = 0.0;
  }
  return t;
}

// Half-Cauchy prior on the Bridge sd implied by phi, plus the change of
// variables from the sampler's logit(phi) to that sd. Returns the value and its
// derivative in phi.
struct ScaleTerm {
  double prior;
  double jacobian;
  double d_prior_dphi;
  double d_jacobian_dphi;
};

ScaleTerm scale_term(double phi) {
  const double sd2 = kPi * kPi / 3.0 * (1.0 / (phi * phi) - 1.0);
  const double sd = std::sqrt(sd2);
  const double dsd_dphi = -(kPi / std::sqrt(3.0)) / (phi * phi * std::sqrt(1.0 - phi * phi));
  ScaleTerm s;
  s.prior = half_cauchy_log_pdf(sd, kPriorScale);
  s.d_prior_dphi = -2.0 * sd / (kPriorScale * kPriorScale + sd2) * dsd_dphi;
  // log |d sd / d w| = log(pi/sqrt3) - log(phi) + log(1-phi)/2 - log(1+phi)/2
  s.jacobian = std::log(kPi / std::sqrt(3.0)) - std::log(phi) + 0.5 * std::log1p(-phi) -
               0.5 * std::log1p(phi);
  s.d_jacobian_dphi = -1.0 / phi - 0.5 / (1.0 - phi) - 0.5 / (1.0 + phi);
  return s;
}

void check_thresholds(const Eigen::VectorXd& alpha) {
  if (alpha.size() < 1) throw ValidationError("at least one threshold is required");
  for (Eigen::Index a = 0; a < alpha.size(); ++a) {
    if (!std::isfinite(alpha[a])) throw ValidationError("non-finite threshold");
    if (a > 0 && !(alpha[a] > alpha[a - 1])) {
      throw ValidationError("thresholds must be strictly increasing (alpha[" + std::to_string(a) +
                            "] <= alpha[" + std::to_string(a - 1) + "])");
    }
  }
}

bool phi_interior(double phi) { return phi > 1e-12 && phi < 1.0 - 1e-12; }

}  // namespace

std::string_view to_string(Level level) {
  switch (level) {
    case Level::fixed:
      return "fixed";
    case Level::two_level:
      return "two";
    case Level::three_level:
      return "three";
  }
  return "unknown";
}

Level parse_level(std::string_view text) {
  if (text == "fixed") return Level::fixed;
  if (text == "two" || text == "two_level") return Level::two_level;
  if (text == "three" || text == "three_level") return Level::three_level;
  throw ValidationError("unknown model level '" + std::string(text) +
                        "' (expected fixed, two or three)");
}

void ModelSpec::validate() const {
  if (n_categories < 2) throw ValidationError("a model needs at least 2 outcome categories");
  if (n_covariates < 0) throw ValidationError("negative covariate count");
}

std::vector<int> Dataset::families_per_region() const {
  std::vector<int> counts(static_cast<std::size_t>(n_regions), 0);
  for (int r : family_region) ++counts[static_cast<std::size_t>(r)];
  return counts;
}

void Dataset::validate(const ModelSpec& spec) const {
  spec.validate();
  if (n_obs() == 0) throw ValidationError("dataset has no observations");
  if (n_regions < 1) throw ValidationError("dataset has no regions");
  if (n_covariates() != spec.n_covariates) {
    throw ValidationError("dataset has " + std::to_string(n_covariates()) +
                          " covariate columns but the model expects " +
                          std::to_string(spec.n_covariates));
  }
  if (static_cast<int>(obs_family.size()) != n_obs() || covariates.rows() != n_obs()) {
    throw ValidationError("observation arrays have inconsistent lengths");
  }
  int prev = 0;
  for (int j = 0; j < n_families(); ++j) {
    const int r = family_region[static_cast<std::size_t>(j)];
    if (r < 0 || r >= n_regions) throw ValidationError("family region index out of range");
    if (r < prev || r > prev + 1 || (j == 0 && r != 0)) {
      throw ValidationError("family " + std::to_string(j + 1) +
                            " breaks the contiguous region ordering");
    }
    prev = r;
  }
  if (n_families() == 0 || prev != n_regions - 1) {
    throw ValidationError("every region needs at least one family");
  }
  std::vector<int> family_count(static_cast<std::size_t>(n_families()), 0);
  for (int k = 0; k < n_obs(); ++k) {
    const int f = obs_family[static_cast<std::size_t>(k)];
    if (f < 0 || f >= n_families()) {
      throw ValidationError("observation " + std::to_string(k + 1) + " has family index out of range");
    }
    ++family_count[static_cast<std::size_t>(f)];
    const int y = outcome[static_cast<std::size_t>(k)];
    if (y < 1 || y > spec.n_categories) {
      throw ValidationError("observation " + std::to_string(k + 1) + " has outcome " +
                            std::to_string(y) + " outside 1.." + std::to_string(spec.n_categories));
    }
    for (double x : row(k)) {
      if (!std::isfinite(x)) {
        throw ValidationError("observation " + std::to_string(k + 1) + " has a non-finite covariate");
      }
    }
  }
  for (int j = 0; j < n_families(); ++j) {
    if (family_count[static_cast<std::size_t>(j)] == 0) {
      throw ValidationError("family " + std::to_string(j + 1) + " has no observations");
    }
  }
}

ParamLayout::ParamLayout(const ModelSpec& spec, int n_regions, int n_families)
    : spec_(spec), n_regions_(n_regions), n_families_(n_families) {
  spec.validate();
  int next = spec.n_thresholds() + spec.n_covariates;
  if (spec.has_region_effects()) w_ustar_ = next++;
  if (spec.has_family_effects()) w_v_ = next++;
  if (spec.has_region_effects()) {
    u_ = next;
    next += n_regions;
  }
  if (spec.has_family_effects()) {
    v_ = next;
    next += n_families;
  }
  size_ = next;
}

TransformResult transform(const Eigen::VectorXd& pv, const ParamLayout& layout) {
  if (pv.size() != layout.size()) {
    throw ValidationError("parameter vector has length " + std::to_string(pv.size()) +
                          ", layout expects " + std::to_string(layout.size()));
  }
  const ModelSpec& spec = layout.spec();
  TransformResult out;
  auto& cp = out.params;
  const int n_thr = spec.n_thresholds();
  cp.alpha_c.resize(n_thr);
  cp.alpha_c[0] = pv[0];
  for (int a = 1; a < n_thr; ++a) {
    cp.alpha_c[a] = cp.alpha_c[a - 1] + std::exp(pv[a]);
    out.log_jacobian += pv[a];
  }
  cp.beta_c = pv.segment(layout.beta(), spec.n_covariates);
  if (layout.w_ustar() >= 0) {
    cp.phi_ustar = logistic(pv[layout.w_ustar()]);
    out.log_jacobian += scale_term(cp.phi_ustar).jacobian;
  }
  if (layout.w_v() >= 0) {
    cp.phi_v = logistic(pv[layout.w_v()]);
    out.log_jacobian += scale_term(cp.phi_v).jacobian;
  }
  if (layout.u() >= 0) cp.u = pv.segment(layout.u(), layout.n_regions());
  if (layout.v() >= 0) cp.v = pv.segment(layout.v(), layout.n_families());
  return out;
}

Eigen::VectorXd inverse_transform(const ConstrainedParams& cp, const ParamLayout& layout) {
  const ModelSpec& spec = layout.spec();
  if (cp.alpha_c.size() != spec.n_thresholds() || cp.beta_c.size() != spec.n_covariates ||
      cp.u.size() != layout.n_u() || cp.v.size() != layout.n_v()) {
    throw ValidationError("constrained parameters do not match the layout");
  }
  check_thresholds(cp.alpha_c);
  Eigen::VectorXd pv(layout.size());
  pv[0] = cp.alpha_c[0];
  for (int a = 1; a < spec.n_thresholds(); ++a) pv[a] = std::log(cp.alpha_c[a] - cp.alpha_c[a - 1]);
  pv.segment(layout.beta(), spec.n_covariates) = cp.beta_c;
  auto logit = [](double p) {
    if (!phi_interior(p)) throw ValidationError("phi must lie strictly inside (0, 1)");
    return std::log(p) - std::log1p(-p);
  };
  if (layout.w_ustar() >= 0) pv[layout.w_ustar()] = logit(cp.phi_ustar);
  if (layout.w_v() >= 0) pv[layout.w_v()] = logit(cp.phi_v);
  if (layout.u() >= 0) pv.segment(layout.u(), layout.n_regions()) = cp.u;
  if (layout.v() >= 0) pv.segment(layout.v(), layout.n_families()) = cp.v;
  return pv;
}

double linear_predictor(const ConstrainedParams& cp, std::span<const double> x, int region,
                        int family, const ModelSpec& spec) {
  if (static_cast<Eigen::Index>(x.size()) != cp.beta_c.size()) {
    throw ValidationError("covariate row width does not match beta");
  }
  double eta = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) eta += x[k] * cp.beta_c[static_cast<Eigen::Index>(k)];
  if (spec.has_region_effects()) {
    if (region < 0 || region >= cp.u.size()) throw std::out_of_range("region index out of range");
    eta += cp.u[region];
  }
  if (spec.has_family_effects()) {
    if (family < 0 || family >= cp.v.size()) throw std::out_of_range("family index out of range");
    eta += cp.v[family];
  }
  return eta;
}

Eigen::VectorXd category_probs(double eta, const Eigen::VectorXd& alpha) {
  check_thresholds(alpha);
  const Eigen::Index n_cat = alpha.size() + 1;
  Eigen::VectorXd p(n_cat);
  double prev = 0.0;
  for (Eigen::Index a = 0; a < alpha.size(); ++a) {
    const double cum = logistic(alpha[a] - eta);
    p[a] = cum - prev;
    prev = cum;
  }
  p[n_cat - 1] = logistic(eta - alpha[alpha.size() - 1]);
  // Interior differences lose relative precision when both cumulative values
  // sit near 1; recompute those from the upper tail instead.
  for (Eigen::Index a = 1; a + 1 < n_cat; ++a) {
    const double lo = alpha[a - 1] - eta;
    if (lo > 0.0) p[a] = logistic(-lo) - logistic(-(alpha[a] - eta));
  }
  return p;
}

double log_category_prob(int y, double eta, const Eigen::VectorXd& alpha) {
  if (y < 1 || y > alpha.size() + 1) throw ValidationError("outcome category out of range");
  return category_term(y, eta, alpha).value;
}

Eigen::VectorXd pointwise_log_likelihood(const ConstrainedParams& cp, const Dataset& data,
                                         const ModelSpec& spec) {
  check_thresholds(cp.alpha_c);
  Eigen::VectorXd out(data.n_obs());
  for (int k = 0; k < data.n_obs(); ++k) {
    const int f = data.obs_family[static_cast<std::size_t>(k)];
    const double eta = linear_predictor(cp, data.row(k), data.family_region[static_cast<std::size_t>(f)],
                                        f, spec);
    out[k] = category_term(data.outcome[static_cast<std::size_t>(k)], eta, cp.alpha_c).value;
  }
  return out;
}

double log_likelihood(const ConstrainedParams& cp, const Dataset& data, const ModelSpec& spec) {
  const Eigen::VectorXd terms = pointwise_log_likelihood(cp, data, spec);
  CompensatedSum sum;
  for (double t : terms) sum.add(t);
  return sum.value();
}

double cauchy_log_pdf(double x, double scale) {
  const double z = x / scale;
  return -std::log(kPi * scale) - std::log1p(z * z);
}

double half_cauchy_log_pdf(double x, double scale) {
  if (x < 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(2.0) + cauchy_log_pdf(x, scale);
}

double log_prior(const ConstrainedParams& cp, const ModelSpec& spec) {
  double lp = 0.0;
  for (double a : cp.alpha_c) lp += cauchy_log_pdf(a, kPriorScale);
  for (double b : cp.beta_c) lp += cauchy_log_pdf(b, kPriorScale);
  if (spec.has_family_effects()) {
    const BridgeParam pv(cp.phi_v);
    lp += half_cauchy_log_pdf(bridge_sd(pv), kPriorScale);
    for (double v : cp.v) lp += bridge_log_pdf(v, pv);
  }
  if (spec.has_region_effects()) {
    lp += half_cauchy_log_pdf(bridge_sd(BridgeParam(cp.phi_ustar)), kPriorScale);
    const ModifiedBridgeParam pu(cp.phi_ustar, cp.phi_v);
    for (double u : cp.u) lp += modified_bridge_log_pdf(u, pu);
  }
  return lp;
}

double log_posterior_and_grad(const Eigen::VectorXd& pv, const Dataset& data,
                              const ParamLayout& layout, Eigen::VectorXd& grad) {
  const ModelSpec& spec = layout.spec();
  auto [cp, log_jacobian] = transform(pv, layout);
  grad.setZero(layout.size());

  const int n_thr = spec.n_thresholds();
  const int p = spec.n_covariates;
  if (layout.w_ustar() >= 0 && !phi_interior(cp.phi_ustar)) {
    throw NonFiniteDensity("prior:phi_ustar", "phi_ustar left the open unit interval");
  }
  if (layout.w_v() >= 0 && !phi_interior(cp.phi_v)) {
    throw NonFiniteDensity("prior:phi_v", "phi_v left the open unit interval");
  }
  for (int a = 1; a < n_thr; ++a) {
    if (!(cp.alpha_c[a] > cp.alpha_c[a - 1])) {
      throw NonFiniteDensity("thresholds", "threshold gaps collapsed to zero");
    }
  }

  Eigen::VectorXd g_alpha = Eigen::VectorXd::Zero(n_thr);
  auto g_beta = grad.segment(layout.beta(), p);
  double g_phi_ustar = 0.0;
  double g_phi_v = 0.0;

  CompensatedSum loglik;
  for (int k = 0; k < data.n_obs(); ++k) {
    const int f = data.obs_family[static_cast<std::size_t>(k)];
    const int r = data.family_region[static_cast<std::size_t>(f)];
    const auto x = data.row(k);
    double eta = 0.0;
    for (int c = 0; c < p; ++c) eta += x[static_cast<std::size_t>(c)] * cp.beta_c[c];
    if (layout.u() >= 0) eta += cp.u[r];
    if (layout.v() >= 0) eta += cp.v[f];
    const int y = data.outcome[static_cast<std::size_t>(k)];
    const CategoryTerm t = category_term(y, eta, cp.alpha_c);
    loglik.add(t.value);
    if (y <= n_thr) g_alpha[y - 1] += t.d_upper;
    if (y >= 2) g_alpha[y - 2] += t.d_lower;
    const double d_eta = -(t.d_upper + t.d_lower);
    for (int c = 0; c < p; ++c) g_beta[c] += d_eta * x[static_cast<std::size_t>(c)];
    if (layout.u() >= 0) grad[layout.u() + r] += d_eta;
    if (layout.v() >= 0) grad[layout.v() + f] += d_eta;
  }
  const double ll = loglik.value();
  if (!std::isfinite(ll)) throw NonFiniteDensity("likelihood", "log-likelihood is not finite");

  double prior = 0.0;
  for (int a = 0; a < n_thr; ++a) {
    const double x = cp.alpha_c[a];
    prior += cauchy_log_pdf(x, kPriorScale);
    g_alpha[a] += -2.0 * x / (kPriorScale * kPriorScale + x * x);
  }
  for (int c = 0; c < p; ++c) {
    const double x = cp.beta_c[c];
    prior += cauchy_log_pdf(x, kPriorScale);
    g_beta[c] += -2.0 * x / (kPriorScale * kPriorScale + x * x);
  }
  if (layout.v() >= 0) {
    const BridgeParam bp(cp.phi_v);
    for (int j = 0; j < layout.n_families(); ++j) {
      prior += bridge_log_pdf(cp.v[j], bp);
      const auto g = bridge_log_pdf_grad(cp.v[j], bp);
      grad[layout.v() + j] += g.d_x;
      g_phi_v += g.d_phi;
    }
  }
  if (layout.u() >= 0) {
    const ModifiedBridgeParam mp(cp.phi_ustar, cp.phi_v);
    for (int i = 0; i < layout.n_regions(); ++i) {
      prior += modified_bridge_log_pdf(cp.u[i], mp);
      const auto g = modified_bridge_log_pdf_grad(cp.u[i], mp);
      grad[layout.u() + i] += g.d_x;
      g_phi_ustar += g.d_phi_y;
      g_phi_v += g.d_phi_z;
    }
  }
  auto finish_phi = [&](int slot, double phi, double g_phi) {
    const ScaleTerm s = scale_term(phi);
    prior += s.prior;
    g_phi += s.d_prior_dphi + s.d_jacobian_dphi;
    grad[slot] = g_phi * phi * (1.0 - phi);
  };
  if (layout.w_ustar() >= 0) finish_phi(layout.w_ustar(), cp.phi_ustar, g_phi_ustar);
  if (layout.w_v() >= 0) finish_phi(layout.w_v(), cp.phi_v, g_phi_v);
  if (!std::isfinite(prior)) throw NonFiniteDensity("prior", "log-prior is not finite");

  // alpha_a = t_1 + sum_{b=2..a} exp(t_b): accumulate from the top threshold down.
  double acc = 0.0;
  for (int a = n_thr - 1; a >= 0; --a) {
    acc += g_alpha[a];
    grad[a] = a == 0 ? acc : acc * std::exp(pv[a]) + 1.0;  // +1 from the log-gap Jacobian
  }

  const double value = ll + prior + log_jacobian;
  if (!std::isfinite(value)) throw NonFiniteDensity("jacobian", "log-Jacobian is not finite");
  return value;
}

PosteriorValue log_posterior_and_grad(const Eigen::VectorXd& pv, const Dataset& data,
                                      const ModelSpec& spec) {
  data.validate(spec);
  const ParamLayout layout(spec, data.n_regions, data.n_families());
  PosteriorValue out;
  out.value = log_posterior_and_grad(pv, data, layout, out.grad);
  return out;
}

MarginalParams marginalize(const Eigen::VectorXd& alpha_c, const Eigen::VectorXd& beta_c,
                           double phi_ustar, double phi_v) {
  const double scale = phi_ustar * phi_v;
  return {alpha_c * scale, beta_c * scale};
}

double effect_interpretation(double beta_m, EffectKind kind) {
  if (!std::isfinite(beta_m)) throw ValidationError("effect interpretation needs a finite coefficient");
  switch (kind.type) {
    case EffectKind::Type::odds_percent:
      return std::expm1(beta_m) * 100.0;
    case EffectKind::Type::log_covariate_percent:
      if (!(kind.multiplier > 0.0)) throw ValidationError("covariate multiplier must be positive");
      return std::expm1(beta_m * std::log(kind.multiplier)) * 100.0;
  }
  return 0.0;
}

}  // namespace bridgeord
