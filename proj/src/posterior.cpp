#include "bridgeord/posterior.hpp"

#include "bridgeord/errors.hpp"
#include "bridgeord/text.hpp"


namespace bridgeord {
namespace {

std::string indexed(const char* base, int i) { return std::string(base) + "[" + std::to_string(i + 1) + "]"; }

}  // namespace

OrdinalPosterior::OrdinalPosterior(const Dataset& data, const ModelSpec& spec)
    : data_(data), spec_(spec), layout_(spec, data.n_regions, data.n_families()) {
  data.validate(spec);
}

double OrdinalPosterior::log_density_gradient(const Eigen::VectorXd& q, Eigen::VectorXd& grad) const {
  return log_posterior_and_grad(q, data_, layout_, grad);
}

std::vector<std::string> OrdinalPosterior::output_names() const {
  std::vector<std::string> names;
  const int n_thr = spec_.n_thresholds();
  const int p = spec_.n_covariates;
  for (int a = 0; a < n_thr; ++a) names.push_back(indexed("alpha_m", a));
  for (int k = 0; k < p; ++k) names.push_back(indexed("beta_m", k));
  if (spec_.has_region_effects()) names.emplace_back("phi_ustar");
  if (spec_.has_family_effects()) names.emplace_back("phi_v");
  for (int a = 0; a < n_thr; ++a) names.push_back(indexed("alpha_c", a));
  for (int k = 0; k < p; ++k) names.push_back(indexed("beta_c", k));
  for (int i = 0; i < layout_.n_u(); ++i) names.push_back(indexed("u", i));
  for (int j = 0; j < layout_.n_v(); ++j) names.push_back(indexed("v", j));
  return names;
}

void OrdinalPosterior::write_output(const Eigen::VectorXd& q, std::span<double> out) const {
  const ConstrainedParams cp = transform(q, layout_).params;
  const MarginalParams mp = marginalize(cp.alpha_c, cp.beta_c, cp.phi_ustar, cp.phi_v);
  std::size_t k = 0;
  for (double x : mp.alpha_m) out[k++] = x;
  for (double x : mp.beta_m) out[k++] = x;
  if (spec_.has_region_effects()) out[k++] = cp.phi_ustar;
  if (spec_.has_family_effects()) out[k++] = cp.phi_v;
  for (double x : cp.alpha_c) out[k++] = x;
  for (double x : cp.beta_c) out[k++] = x;
  for (double x : cp.u) out[k++] = x;
  for (double x : cp.v) out[k++] = x;
}

std::string dataset_hash(const Dataset& data) {
  text::Fnv1a h;
  auto put_int = [&h](long long v) { h.update(&v, sizeof(v)); };
  put_int(data.n_regions);
  put_int(data.n_families());
  put_int(data.n_obs());
  put_int(data.n_covariates());
  for (int r : data.family_region) put_int(r);
  for (int f : data.obs_family) put_int(f);
  for (int y : data.outcome) put_int(y);
  h.update(data.covariates.data(), sizeof(double) * static_cast<std::size_t>(data.covariates.size()));
  return h.hex_digest();
}

void tag_store(DrawsStore& store, const ModelSpec& spec, const Dataset& data) {
  auto& a = store.attributes();
  a["level"] = std::string(to_string(spec.level));
  a["categories"] = std::to_string(spec.n_categories);
  a["covariates"] = std::to_string(spec.n_covariates);
  a["regions"] = std::to_string(data.n_regions);
  a["families"] = std::to_string(data.n_families());
  a["observations"] = std::to_string(data.n_obs());
  a["dataset_hash"] = dataset_hash(data);
}

ModelSpec spec_from_store(const DrawsStore& store) {
  ModelSpec spec;
  spec.level = parse_level(store.attribute("level"));
  spec.n_categories = static_cast<int>(text::parse_int(store.attribute("categories"), "categories"));
  spec.n_covariates = static_cast<int>(text::parse_int(store.attribute("covariates"), "covariates"));
  spec.validate();
  return spec;
}

DrawsStore fit_model(const Dataset& data, const ModelSpec& spec, const SamplerConfig& config) {
  const OrdinalPosterior posterior(data, spec);
  DrawsStore store = run_chains(posterior, config);
  tag_store(store, spec, data);
  return store;
}

DrawColumns::DrawColumns(const DrawsStore& store, const ModelSpec& spec, int n_regions, int n_families)
    : spec_(spec) {
  for (int a = 0; a < spec.n_thresholds(); ++a) alpha_.push_back(store.require(indexed("alpha_c", a)));
  for (int k = 0; k < spec.n_covariates; ++k) beta_.push_back(store.require(indexed("beta_c", k)));
  if (spec.has_region_effects()) {
    phi_ustar_ = store.require("phi_ustar");
    for (int i = 0; i < n_regions; ++i) u_.push_back(store.require(indexed("u", i)));
  }
  if (spec.has_family_effects()) {
    phi_v_ = store.require("phi_v");
    for (int j = 0; j < n_families; ++j) v_.push_back(store.require(indexed("v", j)));
  }
}

ConstrainedParams DrawColumns::params(const DrawsStore& store, int chain, int iter) const {
  ConstrainedParams cp;
  auto gather = [&](const std::vector<int>& cols) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) out[static_cast<Eigen::Index>(i)] = store.at(chain, iter, cols[i]);
    return out;
  };
  cp.alpha_c = gather(alpha_);
  cp.beta_c = gather(beta_);
  if (phi_ustar_ >= 0) cp.phi_ustar = store.at(chain, iter, phi_ustar_);
  if (phi_v_ >= 0) cp.phi_v = store.at(chain, iter, phi_v_);
  cp.u = gather(u_);
  cp.v = gather(v_);
  return cp;
}

ConstrainedParams DrawColumns::posterior_mean(const DrawsStore& store) const {
  if (store.total_draws() == 0) throw ValidationError("no retained draws");
  ConstrainedParams sum = params(store, 0, 0);
  sum.alpha_c.setZero();
  sum.beta_c.setZero();
  sum.u.setZero();
  sum.v.setZero();
  double phi_u = 0.0;
  double phi_v = 0.0;
  for (int c = 0; c < store.n_chains(); ++c) {
    for (int i = 0; i < store.n_retained(); ++i) {
      const ConstrainedParams cp = params(store, c, i);
      sum.alpha_c += cp.alpha_c;
      sum.beta_c += cp.beta_c;
      sum.u += cp.u;
      sum.v += cp.v;
      phi_u += cp.phi_ustar;
      phi_v += cp.phi_v;
    }
  }
  const double m = store.total_draws();
  sum.alpha_c /= m;
  sum.beta_c /= m;
  sum.u /= m;
  sum.v /= m;
  sum.phi_ustar = phi_u / m;
  sum.phi_v = phi_v / m;
  return sum;
}

}  // namespace bridgeord
