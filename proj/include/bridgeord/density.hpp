#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace bridgeord {

/// A differentiable log density on an unconstrained space, plus the set of
/// quantities recorded for each retained draw.
class DensityModel {
 public:
  virtual ~DensityModel() = default;

  virtual int dimension() const = 0;
  /// Returns log p(q) and writes its gradient into `grad` (resized by the callee).
  /// May throw NonFiniteDensity; samplers treat that as a divergent point.
  virtual double log_density_gradient(const Eigen::VectorXd& q, Eigen::VectorXd& grad) const = 0;

  /// Names of the recorded quantities; defaults to q[1]..q[n].
  virtual std::vector<std::string> output_names() const;
  /// Fills `out` (sized like output_names()) from an unconstrained position.
  virtual void write_output(const Eigen::VectorXd& q, std::span<double> out) const;
};

}  // namespace bridgeord
