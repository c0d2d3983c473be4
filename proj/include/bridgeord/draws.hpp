#pragma once

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bridgeord {

/// Per-transition sampler statistics kept alongside every retained draw.
struct IterationStats {
  double accept_stat = 0.0;
  int tree_depth = 0;
  int n_leapfrog = 0;
  bool divergent = false;
  double step_size = 0.0;
  double energy = 0.0;
  double log_density = 0.0;

  bool operator==(const IterationStats&) const = default;
};

/// Retained posterior draws addressed by (chain, iteration, name), with the
/// sampler statistics for each draw and free-form string attributes (model
/// level, dataset hash, seed, ...).
class DrawsStore {
 public:
  DrawsStore() = default;
  DrawsStore(std::vector<std::string> names, int n_chains, int n_retained);

  const std::vector<std::string>& names() const noexcept { return names_; }
  int n_names() const noexcept { return static_cast<int>(names_.size()); }
  int n_chains() const noexcept { return static_cast<int>(values_.size()); }
  int n_retained() const noexcept { return n_retained_; }
  int total_draws() const noexcept { return n_chains() * n_retained_; }

  std::optional<int> index_of(const std::string& name) const;
  /// Like index_of but throws ValidationError for unknown names.
  int require(const std::string& name) const;

  double& at(int chain, int iter, int col) { return values_[static_cast<std::size_t>(chain)](iter, col); }
  double at(int chain, int iter, int col) const {
    return values_[static_cast<std::size_t>(chain)](iter, col);
  }
  /// Values of one chain, n_retained x n_names.
  const Eigen::MatrixXd& chain_values(int chain) const { return values_[static_cast<std::size_t>(chain)]; }
  Eigen::MatrixXd& chain_values(int chain) { return values_[static_cast<std::size_t>(chain)]; }

  IterationStats& stats(int chain, int iter) {
    return stats_[static_cast<std::size_t>(chain)][static_cast<std::size_t>(iter)];
  }
  const IterationStats& stats(int chain, int iter) const {
    return stats_[static_cast<std::size_t>(chain)][static_cast<std::size_t>(iter)];
  }

  /// Draws of one quantity split by chain.
  std::vector<std::vector<double>> by_chain(int col) const;
  /// Draws of one quantity pooled chain-major.
  std::vector<double> pooled(int col) const;

  std::map<std::string, std::string>& attributes() noexcept { return attributes_; }
  const std::map<std::string, std::string>& attributes() const noexcept { return attributes_; }
  std::string attribute(const std::string& key) const;  // throws ValidationError if missing

  bool operator==(const DrawsStore& other) const;

 private:
  std::vector<std::string> names_;
  int n_retained_ = 0;
  std::vector<Eigen::MatrixXd> values_;
  std::vector<std::vector<IterationStats>> stats_;
  std::map<std::string, std::string> attributes_;
};

}  // namespace bridgeord
