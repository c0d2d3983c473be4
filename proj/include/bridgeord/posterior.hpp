#pragma once

// Glue between the ordinal model and the generic sampler: a DensityModel for
// the joint posterior, and lookup of constrained parameters inside a DrawsStore.

#include "bridgeord/density.hpp"
#include "bridgeord/draws.hpp"
#include "bridgeord/model.hpp"
#include "bridgeord/nuts.hpp"

#include <string>
#include <vector>

namespace bridgeord {

/// Joint posterior of a cumulative-logit model. Holds a reference to `data`,
/// which must outlive this object.
///
/// Recorded quantities, in order: alpha_m[a], beta_m[k], phi_ustar, phi_v,
/// alpha_c[a], beta_c[k], u[i], v[j] (1-based indices; phi and effect blocks
/// only where the model level has them).
class OrdinalPosterior : public DensityModel {
 public:
  OrdinalPosterior(const Dataset& data, const ModelSpec& spec);

  int dimension() const override { return layout_.size(); }
  double log_density_gradient(const Eigen::VectorXd& q, Eigen::VectorXd& grad) const override;
  std::vector<std::string> output_names() const override;
  void write_output(const Eigen::VectorXd& q, std::span<double> out) const override;

  const ParamLayout& layout() const noexcept { return layout_; }
  const ModelSpec& spec() const noexcept { return spec_; }

 private:
  const Dataset& data_;
  ModelSpec spec_;
  ParamLayout layout_;
};

/// Fingerprint of a dataset's indices, outcomes and covariate bits.
std::string dataset_hash(const Dataset& data);

/// Records level, category/covariate counts, cluster sizes and the dataset hash.
void tag_store(DrawsStore& store, const ModelSpec& spec, const Dataset& data);
/// Inverse of tag_store for the model description.
ModelSpec spec_from_store(const DrawsStore& store);

/// Samples the posterior and tags the resulting store.
DrawsStore fit_model(const Dataset& data, const ModelSpec& spec, const SamplerConfig& config);

/// Column positions of the constrained parameters inside a store.
class DrawColumns {
 public:
  DrawColumns(const DrawsStore& store, const ModelSpec& spec, int n_regions, int n_families);

  ConstrainedParams params(const DrawsStore& store, int chain, int iter) const;
  /// Component-wise posterior means of the constrained draws.
  ConstrainedParams posterior_mean(const DrawsStore& store) const;

 private:
  ModelSpec spec_;
  std::vector<int> alpha_;
  std::vector<int> beta_;
  int phi_ustar_ = -1;
  int phi_v_ = -1;
  std::vector<int> u_;
  std::vector<int> v_;
};

}  // namespace bridgeord
