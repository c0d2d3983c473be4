#pragma once

// No-U-Turn sampler with multinomial trajectory sampling, dual-averaging
// step-size adaptation and windowed diagonal metric estimation.

#include "bridgeord/density.hpp"
#include "bridgeord/draws.hpp"
#include "bridgeord/random.hpp"

#include <Eigen/Dense>

#include <cstdint>

namespace bridgeord {

struct SamplerConfig {
  int n_chains = 4;
  int n_iterations = 2000;  // per chain, warmup included
  int n_warmup = 1000;
  double target_accept = 0.8;
  int max_tree_depth = 10;
  std::uint64_t seed = 1;
  double max_energy_error = 1000.0;
  double max_divergent_fraction = 0.1;
  bool parallel_chains = true;

  void validate() const;  // throws ValidationError
};

/// Position, momentum and the cached log density / gradient at the position.
struct PhasePoint {
  Eigen::VectorXd q;
  Eigen::VectorXd p;
  Eigen::VectorXd grad;
  double log_density = 0.0;
};

/// Evaluates log density and gradient at `point.q`; a NonFiniteDensity is
/// mapped to log_density = -inf rather than propagated.
void refresh(PhasePoint& point, const DensityModel& target);

/// Hamiltonian -log p(q) + p' M^-1 p / 2 for diagonal inverse metric `inv_mass`.
double hamiltonian(const PhasePoint& point, const Eigen::VectorXd& inv_mass);

/// `n_steps` leapfrog steps (half kick, drift, half kick). Negative step sizes
/// integrate backwards in time.
void leapfrog(PhasePoint& point, double step_size, int n_steps, const DensityModel& target,
              const Eigen::VectorXd& inv_mass);
/// Unit-metric overload.
void leapfrog(PhasePoint& point, double step_size, int n_steps, const DensityModel& target);

struct TransitionStats {
  double accept_stat = 0.0;
  int tree_depth = 0;
  int n_leapfrog = 0;
  bool divergent = false;
  bool saturated = false;  // stopped by max_tree_depth rather than a U-turn
  double energy = 0.0;
  double log_density = 0.0;
};

struct NutsOptions {
  int max_tree_depth = 10;
  double max_energy_error = 1000.0;
};

/// One NUTS transition from `current`. On return `current` holds the next
/// state (with log density and gradient cached).
TransitionStats nuts_transition(PhasePoint& current, double step_size, const Eigen::VectorXd& inv_mass,
                                const DensityModel& target, RandomStream& rng,
                                const NutsOptions& options = {});

/// Dual averaging of log step size towards a target acceptance statistic.
class StepSizeAdapter {
 public:
  explicit StepSizeAdapter(double target_accept = 0.8) : delta_(target_accept) {}
  void restart(double step_size);
  /// Returns the step size to use for the next transition.
  double learn(double accept_stat);
  /// Final (averaged) step size.
  double final_step_size() const { return std::exp(x_bar_); }

 private:
  double delta_;
  double mu_ = 0.0;
  double s_bar_ = 0.0;
  double x_bar_ = 0.0;
  int counter_ = 0;
  static constexpr double kGamma = 0.05;
  static constexpr double kT0 = 10.0;
  static constexpr double kKappa = 0.75;
};

/// Windowed variance estimation for the diagonal metric: a fixed initial
/// buffer, doubling slow windows, and a terminal buffer for the step size.
class MetricAdapter {
 public:
  MetricAdapter(int dimension, int n_warmup);
  /// Feeds one warmup position. Returns true when a window closed and `inv_mass`
  /// was updated.
  bool learn(const Eigen::VectorXd& q, Eigen::VectorXd& inv_mass);

  int init_buffer() const { return init_buffer_; }
  int term_buffer() const { return term_buffer_; }

 private:
  bool in_window() const;
  bool window_end() const;
  void next_window();

  int n_warmup_;
  int init_buffer_ = 75;
  int term_buffer_ = 50;
  int window_size_ = 25;
  int next_window_end_ = 0;
  int counter_ = 0;
  bool enabled_ = true;
  long n_samples_ = 0;
  Eigen::VectorXd mean_;
  Eigen::VectorXd m2_;
};

/// Heuristic initial step size: doubles or halves until a single leapfrog
/// step's acceptance crosses 0.8.
double initial_step_size(const PhasePoint& start, double step_size, const Eigen::VectorXd& inv_mass,
                         const DensityModel& target, RandomStream& rng);

/// Result of warmup for one chain.
struct AdaptationResult {
  double step_size = 0.0;
  Eigen::VectorXd inv_mass;
};

/// Runs every chain from an independent uniform(-2, 2) start and returns the
/// post-warmup draws. Chain c uses RandomStream(seed, c + 1), so the result
/// does not depend on thread scheduling. Throws SamplingError when a chain
/// exceeds the divergence budget or its step size collapses.
DrawsStore run_chains(const DensityModel& target, const SamplerConfig& config);

/// Same, also returning the per-chain adaptation outcome.
DrawsStore run_chains(const DensityModel& target, const SamplerConfig& config,
                      std::vector<AdaptationResult>& adaptation);

}  // namespace bridgeord
