#pragma once

// Cumulative-logit model for ordinal outcomes clustered as region -> family -> person:
//
//   logit P(Y <= a | x, U_i, V_ij) = alpha_a - x'beta - U_i - V_ij,   a = 1..A-1
//
// with V_ij ~ Bridge(phi_v) and U_i ~ ModifiedBridge(phi_ustar, phi_v), so that
// the population-averaged (marginal) parameters are phi_ustar * phi_v times the
// conditional ones.

#include <Eigen/Dense>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bridgeord {

enum class Level { fixed, two_level, three_level };

std::string_view to_string(Level level);
/// Accepts "fixed", "two", "three" (and the long forms "two_level", "three_level").
Level parse_level(std::string_view text);

struct ModelSpec {
  int n_categories = 3;
  int n_covariates = 0;
  Level level = Level::three_level;

  bool has_region_effects() const noexcept { return level == Level::three_level; }
  bool has_family_effects() const noexcept { return level != Level::fixed; }
  int n_thresholds() const noexcept { return n_categories - 1; }
  void validate() const;
};

using CovariateMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Three-level observation table. Regions and families use dense 0-based
/// indices; families of one region occupy a contiguous index range.
struct Dataset {
  int n_regions = 0;
  std::vector<int> family_region;  // region of each family, nondecreasing
  std::vector<int> obs_family;     // family of each observation
  std::vector<int> outcome;        // 1..A
  CovariateMatrix covariates;      // one row per observation

  std::vector<std::string> region_labels;
  std::vector<std::string> family_labels;
  std::vector<std::string> covariate_names;

  int n_families() const noexcept { return static_cast<int>(family_region.size()); }
  int n_obs() const noexcept { return static_cast<int>(outcome.size()); }
  int n_covariates() const noexcept { return static_cast<int>(covariates.cols()); }
  int obs_region(int k) const { return family_region[obs_family[k]]; }
  std::span<const double> row(int k) const {
    return {covariates.data() + static_cast<Eigen::Index>(k) * covariates.cols(),
            static_cast<std::size_t>(covariates.cols())};
  }
  std::vector<int> families_per_region() const;

  /// Throws ValidationError on any broken invariant (index gaps, outcome range,
  /// non-finite covariates, width mismatch with the spec).
  void validate(const ModelSpec& spec) const;
};

struct ConstrainedParams {
  Eigen::VectorXd alpha_c;  // strictly increasing thresholds
  Eigen::VectorXd beta_c;
  double phi_ustar = 1.0;   // 1 when the model has no region effects
  double phi_v = 1.0;       // 1 when the model has no family effects
  Eigen::VectorXd u;        // region effects (already on the U = U*/phi_v scale)
  Eigen::VectorXd v;        // family effects
};

/// Position of each block inside the unconstrained sampler vector:
///
///   [ t_1 | log-gaps t_2..t_{A-1} | beta (p) | w_ustar | w_v | u (s) | v (F) ]
///
/// w_ustar is present for three-level models only, w_v and v for two- and
/// three-level models, u for three-level models only.
class ParamLayout {
 public:
  ParamLayout(const ModelSpec& spec, int n_regions, int n_families);

  const ModelSpec& spec() const noexcept { return spec_; }
  int size() const noexcept { return size_; }
  int thresholds() const noexcept { return 0; }
  int beta() const noexcept { return spec_.n_thresholds(); }
  int w_ustar() const noexcept { return w_ustar_; }  // -1 if absent
  int w_v() const noexcept { return w_v_; }          // -1 if absent
  int u() const noexcept { return u_; }              // -1 if absent
  int v() const noexcept { return v_; }              // -1 if absent
  int n_regions() const noexcept { return n_regions_; }
  int n_families() const noexcept { return n_families_; }
  int n_u() const noexcept { return u_ < 0 ? 0 : n_regions_; }
  int n_v() const noexcept { return v_ < 0 ? 0 : n_families_; }

 private:
  ModelSpec spec_;
  int n_regions_;
  int n_families_;
  int w_ustar_ = -1;
  int w_v_ = -1;
  int u_ = -1;
  int v_ = -1;
  int size_ = 0;
};

struct TransformResult {
  ConstrainedParams params;
  /// Sum of log-gaps, plus for every phi the log-derivative of the implied
  /// Bridge standard deviation with respect to its unconstrained logit.
  double log_jacobian = 0.0;
};

TransformResult transform(const Eigen::VectorXd& pv, const ParamLayout& layout);
Eigen::VectorXd inverse_transform(const ConstrainedParams& cp, const ParamLayout& layout);

double linear_predictor(const ConstrainedParams& cp, std::span<const double> x, int region,
                        int family, const ModelSpec& spec);

/// Category probabilities for a cumulative logit with thresholds `alpha`
/// (length A-1, strictly increasing). Throws ValidationError otherwise.
Eigen::VectorXd category_probs(double eta, const Eigen::VectorXd& alpha);

/// log P(Y = y | eta, alpha), y in 1..A, floored at log(1e-300).
double log_category_prob(int y, double eta, const Eigen::VectorXd& alpha);

double log_likelihood(const ConstrainedParams& cp, const Dataset& data, const ModelSpec& spec);
/// Per-observation log-likelihood terms, in dataset order.
Eigen::VectorXd pointwise_log_likelihood(const ConstrainedParams& cp, const Dataset& data,
                                         const ModelSpec& spec);

double cauchy_log_pdf(double x, double scale);
double half_cauchy_log_pdf(double x, double scale);

/// Cauchy(0,5) on thresholds and coefficients, half-Cauchy(0,5) on the Bridge
/// standard deviation implied by each phi, Bridge(phi_v) on family effects and
/// ModifiedBridge(phi_ustar, phi_v) on region effects.
double log_prior(const ConstrainedParams& cp, const ModelSpec& spec);

struct PosteriorValue {
  double value = 0.0;
  Eigen::VectorXd grad;
};

/// Joint log posterior on the unconstrained scale and its exact gradient.
/// Throws NonFiniteDensity naming the offending block if the value is not finite.
PosteriorValue log_posterior_and_grad(const Eigen::VectorXd& pv, const Dataset& data,
                                      const ModelSpec& spec);

/// Same as above with a precomputed layout; `grad` is resized as needed.
double log_posterior_and_grad(const Eigen::VectorXd& pv, const Dataset& data,
                              const ParamLayout& layout, Eigen::VectorXd& grad);

struct MarginalParams {
  Eigen::VectorXd alpha_m;
  Eigen::VectorXd beta_m;
};

/// alpha_m = phi_ustar * phi_v * alpha_c, likewise for beta. Pass phi_ustar = 1
/// for two-level models (and both = 1 for fixed effects).
MarginalParams marginalize(const Eigen::VectorXd& alpha_c, const Eigen::VectorXd& beta_c,
                           double phi_ustar, double phi_v);

struct EffectKind {
  enum class Type { odds_percent, log_covariate_percent };
  Type type = Type::odds_percent;
  double multiplier = 1.0;

  static EffectKind odds_percent() { return {}; }
  static EffectKind log_covariate_percent(double multiplier) {
    return {Type::log_covariate_percent, multiplier};
  }
};

/// Percent change in the odds of a higher category: (exp(beta) - 1) * 100 for a
/// unit change, or (exp(beta * log(m)) - 1) * 100 when a log-scale covariate is
/// multiplied by m.
double effect_interpretation(double beta_m, EffectKind kind);

}  // namespace bridgeord
