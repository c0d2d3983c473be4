#include "bridgeord/nuts.hpp"

#include "bridgeord/errors.hpp"
#include "bridgeord/text.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <string>
#include <thread>

namespace bridgeord {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_sum_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

void sample_momentum(PhasePoint& point, const Eigen::VectorXd& inv_mass, RandomStream& rng) {
  point.p.resize(point.q.size());
  for (Eigen::Index i = 0; i < point.q.size(); ++i) point.p[i] = rng.normal() / std::sqrt(inv_mass[i]);
}

bool no_u_turn(const Eigen::VectorXd& p_sharp_minus, const Eigen::VectorXd& p_sharp_plus,
               const Eigen::VectorXd& rho) {
  return p_sharp_plus.dot(rho) > 0 && p_sharp_minus.dot(rho) > 0;
}

// Recursive trajectory builder. One instance per transition.
class TreeBuilder {
 public:
  TreeBuilder(const DensityModel& target, const Eigen::VectorXd& inv_mass, double step_size,
              double h0, RandomStream& rng, double max_energy_error)
      : target_(target),
        inv_mass_(inv_mass),
        step_size_(step_size),
        h0_(h0),
        rng_(rng),
        max_energy_error_(max_energy_error) {}

  // Extends `z` by 2^depth leapfrog steps in direction `sign`. Returns false if
  // the subtree diverged or made a U-turn.
  bool build(PhasePoint& z, int depth, int sign, PhasePoint& z_propose, Eigen::VectorXd& p_sharp_beg,
             Eigen::VectorXd& p_sharp_end, Eigen::VectorXd& rho, Eigen::VectorXd& p_beg,
             Eigen::VectorXd& p_end, double& log_sum_weight) {
    if (depth == 0) {
      leapfrog(z, sign * step_size_, 1, target_, inv_mass_);
      ++n_leapfrog_;
      double h = hamiltonian(z, inv_mass_);
      if (std::isnan(h)) h = kInf;
      if (h - h0_ > max_energy_error_) divergent_ = true;
      log_sum_weight = log_sum_exp(log_sum_weight, h0_ - h);
      sum_metro_prob_ += h0_ - h > 0 ? 1.0 : std::exp(h0_ - h);
      z_propose = z;
      p_sharp_beg = inv_mass_.cwiseProduct(z.p);
      p_sharp_end = p_sharp_beg;
      rho += z.p;
      p_beg = z.p;
      p_end = p_beg;
      return !divergent_;
    }

    const Eigen::Index n = z.q.size();
    double log_sum_weight_init = -kInf;
    Eigen::VectorXd p_init_end(n), p_sharp_init_end(n);
    Eigen::VectorXd rho_init = Eigen::VectorXd::Zero(n);
    if (!build(z, depth - 1, sign, z_propose, p_sharp_beg, p_sharp_init_end, rho_init, p_beg,
               p_init_end, log_sum_weight_init)) {
      return false;
    }

    PhasePoint z_propose_final;
    double log_sum_weight_final = -kInf;
    Eigen::VectorXd p_final_beg(n), p_sharp_final_beg(n);
    Eigen::VectorXd rho_final = Eigen::VectorXd::Zero(n);
    if (!build(z, depth - 1, sign, z_propose_final, p_sharp_final_beg, p_sharp_end, rho_final,
               p_final_beg, p_end, log_sum_weight_final)) {
      return false;
    }

    const double log_sum_weight_subtree = log_sum_exp(log_sum_weight_init, log_sum_weight_final);
    log_sum_weight = log_sum_exp(log_sum_weight, log_sum_weight_subtree);
    if (log_sum_weight_final > log_sum_weight_subtree) {
      z_propose = z_propose_final;
    } else if (rng_.uniform() < std::exp(log_sum_weight_final - log_sum_weight_subtree)) {
      z_propose = z_propose_final;
    }

    const Eigen::VectorXd rho_subtree = rho_init + rho_final;
    rho += rho_subtree;
    // Check the merged subtree and both straddling sub-trajectories.
    bool persist = no_u_turn(p_sharp_beg, p_sharp_end, rho_subtree);
    persist = persist && no_u_turn(p_sharp_beg, p_sharp_final_beg, rho_init + p_final_beg);
    persist = persist && no_u_turn(p_sharp_init_end, p_sharp_end, rho_final + p_init_end);
    return persist;
  }

  int n_leapfrog() const { return n_leapfrog_; }
  bool divergent() const { return divergent_; }
  double sum_metro_prob() const { return sum_metro_prob_; }

 private:
  const DensityModel& target_;
  const Eigen::VectorXd& inv_mass_;
  double step_size_;
  double h0_;
  RandomStream& rng_;
  double max_energy_error_;
  int n_leapfrog_ = 0;
  bool divergent_ = false;
  double sum_metro_prob_ = 0.0;
};

bool finite_point(const PhasePoint& point) {
  return std::isfinite(point.log_density) && point.grad.allFinite();
}

}  // namespace

void SamplerConfig::validate() const {
  if (n_chains < 1) throw ValidationError("need at least one chain");
  if (n_iterations < 1) throw ValidationError("need at least one iteration");
  if (n_warmup < 0 || n_warmup >= n_iterations) {
    throw ValidationError("warmup must be non-negative and smaller than the iteration count");
  }
  if (!(target_accept > 0.0 && target_accept < 1.0)) {
    throw ValidationError("target acceptance must lie in (0, 1)");
  }
  if (max_tree_depth < 1) throw ValidationError("max tree depth must be positive");
  if (!(max_energy_error > 0.0)) throw ValidationError("divergence threshold must be positive");
}

void refresh(PhasePoint& point, const DensityModel& target) {
  try {
    point.log_density = target.log_density_gradient(point.q, point.grad);
    if (!std::isfinite(point.log_density)) point.log_density = -kInf;
  } catch (const NonFiniteDensity&) {
    point.log_density = -kInf;
    point.grad.setZero(point.q.size());
  }
}

double hamiltonian(const PhasePoint& point, const Eigen::VectorXd& inv_mass) {
  return -point.log_density + 0.5 * point.p.cwiseProduct(point.p).dot(inv_mass);
}

void leapfrog(PhasePoint& point, double step_size, int n_steps, const DensityModel& target,
              const Eigen::VectorXd& inv_mass) {
  for (int s = 0; s < n_steps; ++s) {
    point.p += 0.5 * step_size * point.grad;
    point.q += step_size * inv_mass.cwiseProduct(point.p);
    refresh(point, target);
    point.p += 0.5 * step_size * point.grad;
  }
}

void leapfrog(PhasePoint& point, double step_size, int n_steps, const DensityModel& target) {
  leapfrog(point, step_size, n_steps, target, Eigen::VectorXd::Ones(point.q.size()));
}

TransitionStats nuts_transition(PhasePoint& current, double step_size, const Eigen::VectorXd& inv_mass,
                                const DensityModel& target, RandomStream& rng,
                                const NutsOptions& options) {
  const Eigen::Index n = current.q.size();
  sample_momentum(current, inv_mass, rng);
  const double h0 = hamiltonian(current, inv_mass);

  PhasePoint z_fwd = current;
  PhasePoint z_bck = current;
  PhasePoint z_sample = current;
  PhasePoint z_propose = current;

  Eigen::VectorXd p_fwd_fwd = current.p;
  Eigen::VectorXd p_sharp_fwd_fwd = inv_mass.cwiseProduct(current.p);
  Eigen::VectorXd p_fwd_bck = p_fwd_fwd;
  Eigen::VectorXd p_sharp_fwd_bck = p_sharp_fwd_fwd;
  Eigen::VectorXd p_bck_fwd = p_fwd_fwd;
  Eigen::VectorXd p_sharp_bck_fwd = p_sharp_fwd_fwd;
  Eigen::VectorXd p_bck_bck = p_fwd_fwd;
  Eigen::VectorXd p_sharp_bck_bck = p_sharp_fwd_fwd;
  Eigen::VectorXd rho = current.p;

  double log_sum_weight = 0.0;  // log weight of the initial point, exp(h0 - h0)
  TreeBuilder builder(target, inv_mass, step_size, h0, rng, options.max_energy_error);
  int depth = 0;
  bool saturated = true;

  while (depth < options.max_tree_depth) {
    Eigen::VectorXd rho_fwd = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd rho_bck = Eigen::VectorXd::Zero(n);
    double log_sum_weight_subtree = -kInf;
    bool valid_subtree = false;

    if (rng.uniform() > 0.5) {
      rho_bck = rho;
      p_bck_fwd = p_fwd_bck;
      p_sharp_bck_fwd = p_sharp_fwd_bck;
      valid_subtree = builder.build(z_fwd, depth, +1, z_propose, p_sharp_fwd_bck, p_sharp_fwd_fwd,
                                    rho_fwd, p_fwd_bck, p_fwd_fwd, log_sum_weight_subtree);
    } else {
      rho_fwd = rho;
      p_fwd_bck = p_bck_fwd;
      p_sharp_fwd_bck = p_sharp_bck_fwd;
      valid_subtree = builder.build(z_bck, depth, -1, z_propose, p_sharp_bck_fwd, p_sharp_bck_bck,
                                    rho_bck, p_bck_fwd, p_bck_bck, log_sum_weight_subtree);
    }
    if (!valid_subtree) {
      saturated = false;
      break;
    }
    ++depth;

    if (log_sum_weight_subtree > log_sum_weight) {
      z_sample = z_propose;
    } else if (rng.uniform() < std::exp(log_sum_weight_subtree - log_sum_weight)) {
      z_sample = z_propose;
    }
    log_sum_weight = log_sum_exp(log_sum_weight, log_sum_weight_subtree);

    rho = rho_bck + rho_fwd;
    bool persist = no_u_turn(p_sharp_bck_bck, p_sharp_fwd_fwd, rho);
    persist = persist && no_u_turn(p_sharp_bck_bck, p_sharp_fwd_bck, rho_bck + p_fwd_bck);
    persist = persist && no_u_turn(p_sharp_bck_fwd, p_sharp_fwd_fwd, rho_fwd + p_bck_fwd);
    if (!persist) {
      saturated = false;
      break;
    }
  }

  current = std::move(z_sample);
  TransitionStats stats;
  stats.n_leapfrog = builder.n_leapfrog();
  stats.tree_depth = depth;
  stats.divergent = builder.divergent();
  stats.saturated = saturated && !builder.divergent();
  stats.accept_stat = stats.n_leapfrog > 0 ? builder.sum_metro_prob() / stats.n_leapfrog : 0.0;
  stats.log_density = current.log_density;
  stats.energy = hamiltonian(current, inv_mass);
  return stats;
}

void StepSizeAdapter::restart(double step_size) {
  mu_ = std::log(10.0 * step_size);
  s_bar_ = 0.0;
  x_bar_ = 0.0;
  counter_ = 0;
}

double StepSizeAdapter::learn(double accept_stat) {
  ++counter_;
  accept_stat = std::min(1.0, accept_stat);
  const double eta = 1.0 / (counter_ + kT0);
  s_bar_ = (1.0 - eta) * s_bar_ + eta * (delta_ - accept_stat);
  const double x = mu_ - s_bar_ * std::sqrt(static_cast<double>(counter_)) / kGamma;
  const double x_eta = std::pow(static_cast<double>(counter_), -kKappa);
  x_bar_ = (1.0 - x_eta) * x_bar_ + x_eta * x;
  return std::exp(x);
}

MetricAdapter::MetricAdapter(int dimension, int n_warmup)
    : n_warmup_(n_warmup),
      mean_(Eigen::VectorXd::Zero(dimension)),
      m2_(Eigen::VectorXd::Zero(dimension)) {
  if (n_warmup < 20) {
    enabled_ = false;
    return;
  }
  if (init_buffer_ + window_size_ + term_buffer_ > n_warmup) {
    init_buffer_ = static_cast<int>(0.15 * n_warmup);
    term_buffer_ = static_cast<int>(0.1 * n_warmup);
    window_size_ = n_warmup - (init_buffer_ + term_buffer_);
  }
  next_window_end_ = init_buffer_ + window_size_ - 1;
}

bool MetricAdapter::in_window() const {
  return counter_ >= init_buffer_ && counter_ < n_warmup_ - term_buffer_ && counter_ != n_warmup_;
}

bool MetricAdapter::window_end() const {
  return counter_ == next_window_end_ && counter_ != n_warmup_;
}

void MetricAdapter::next_window() {
  const int last = n_warmup_ - term_buffer_ - 1;
  if (next_window_end_ == last) return;
  window_size_ *= 2;
  next_window_end_ = counter_ + window_size_;
  if (next_window_end_ != last && next_window_end_ + 2 * window_size_ >= n_warmup_ - term_buffer_) {
    next_window_end_ = last;
  }
}

bool MetricAdapter::learn(const Eigen::VectorXd& q, Eigen::VectorXd& inv_mass) {
  if (!enabled_) return false;
  if (in_window()) {
    ++n_samples_;
    const Eigen::VectorXd delta = q - mean_;
    mean_ += delta / static_cast<double>(n_samples_);
    m2_ += delta.cwiseProduct(q - mean_);
  }
  if (window_end()) {
    next_window();
    const double n = static_cast<double>(n_samples_);
    const Eigen::VectorXd var = m2_ / (n - 1.0);
    // Regularize towards a small constant, as the window may be short.
    inv_mass = (n / (n + 5.0)) * var.array() + 1e-3 * (5.0 / (n + 5.0));
    n_samples_ = 0;
    mean_.setZero();
    m2_.setZero();
    ++counter_;
    return true;
  }
  ++counter_;
  return false;
}

double initial_step_size(const PhasePoint& start, double step_size, const Eigen::VectorXd& inv_mass,
                         const DensityModel& target, RandomStream& rng) {
  const double log_threshold = std::log(0.8);
  auto trial = [&](double eps) {
    PhasePoint z = start;
    sample_momentum(z, inv_mass, rng);
    const double h0 = hamiltonian(z, inv_mass);
    leapfrog(z, eps, 1, target, inv_mass);
    double h = hamiltonian(z, inv_mass);
    if (std::isnan(h)) h = kInf;
    return h0 - h;
  };
  const int direction = trial(step_size) > log_threshold ? 1 : -1;
  while (true) {
    const double delta_h = trial(step_size);
    if (direction == 1 && !(delta_h > log_threshold)) break;
    if (direction == -1 && !(delta_h < log_threshold)) break;
    step_size = direction == 1 ? 2.0 * step_size : 0.5 * step_size;
    if (step_size > 1e7) {
      throw SamplingError("step size search diverged; the posterior is probably improper");
    }
    if (!(step_size > 0.0)) throw SamplingError("step size search collapsed to zero");
  }
  return step_size;
}

namespace {

void run_one_chain(const DensityModel& target, const SamplerConfig& config, int chain,
                   DrawsStore& store, AdaptationResult& adaptation) {
  RandomStream rng(config.seed, static_cast<std::uint64_t>(chain) + 1);
  const int dim = target.dimension();

  PhasePoint point;
  point.q.resize(dim);
  bool initialized = false;
  for (int attempt = 0; attempt < 100 && !initialized; ++attempt) {
    for (int i = 0; i < dim; ++i) point.q[i] = -2.0 + 4.0 * rng.uniform();
    refresh(point, target);
    initialized = finite_point(point);
  }
  if (!initialized) {
    throw SamplingError("chain " + std::to_string(chain + 1) +
                        ": no finite starting point after 100 random initializations");
  }

  Eigen::VectorXd inv_mass = Eigen::VectorXd::Ones(dim);
  double step_size = initial_step_size(point, 1.0, inv_mass, target, rng);
  StepSizeAdapter step_adapter(config.target_accept);
  step_adapter.restart(step_size);
  MetricAdapter metric(dim, config.n_warmup);
  const NutsOptions options{config.max_tree_depth, config.max_energy_error};
  const std::vector<std::string> names = target.output_names();
  std::vector<double> output(names.size());

  int divergent = 0;
  for (int it = 0; it < config.n_iterations; ++it) {
    const double used_step = step_size;
    const TransitionStats t = nuts_transition(point, step_size, inv_mass, target, rng, options);
    if (it < config.n_warmup) {
      step_size = step_adapter.learn(t.accept_stat);
      if (metric.learn(point.q, inv_mass)) {
        step_size = initial_step_size(point, step_size, inv_mass, target, rng);
        step_adapter.restart(step_size);
      }
      if (it == config.n_warmup - 1) step_size = step_adapter.final_step_size();
      if (!(step_size > 1e-12) || !std::isfinite(step_size)) {
        throw SamplingError("chain " + std::to_string(chain + 1) + ": step size collapsed to " +
                            text::format_double(step_size) + " during warmup iteration " +
                            std::to_string(it + 1) + " (last accept stat " +
                            text::format_double(t.accept_stat) + ")");
      }
      continue;
    }
    const int r = it - config.n_warmup;
    target.write_output(point.q, output);
    for (std::size_t c = 0; c < output.size(); ++c) store.at(chain, r, static_cast<int>(c)) = output[c];
    IterationStats& s = store.stats(chain, r);
    s.accept_stat = t.accept_stat;
    s.tree_depth = t.tree_depth;
    s.n_leapfrog = t.n_leapfrog;
    s.divergent = t.divergent;
    s.step_size = used_step;
    s.energy = t.energy;
    s.log_density = t.log_density;
    if (t.divergent) ++divergent;
  }

  const int retained = config.n_iterations - config.n_warmup;
  if (divergent > config.max_divergent_fraction * retained) {
    throw SamplingError("chain " + std::to_string(chain + 1) + ": " + std::to_string(divergent) +
                        " of " + std::to_string(retained) +
                        " post-warmup transitions diverged (limit " +
                        text::format_double(100.0 * config.max_divergent_fraction) + "%)");
  }
  adaptation.step_size = step_size;
  adaptation.inv_mass = inv_mass;
}

}  // namespace

DrawsStore run_chains(const DensityModel& target, const SamplerConfig& config,
                      std::vector<AdaptationResult>& adaptation) {
  config.validate();
  DrawsStore store(target.output_names(), config.n_chains, config.n_iterations - config.n_warmup);
  adaptation.assign(static_cast<std::size_t>(config.n_chains), {});
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(config.n_chains));

  auto work = [&](int c) {
    try {
      run_one_chain(target, config, c, store, adaptation[static_cast<std::size_t>(c)]);
    } catch (...) {
      errors[static_cast<std::size_t>(c)] = std::current_exception();
    }
  };
  if (config.parallel_chains && config.n_chains > 1 && std::thread::hardware_concurrency() > 1) {
    std::vector<std::thread> threads;
    for (int c = 0; c < config.n_chains; ++c) threads.emplace_back(work, c);
    for (auto& t : threads) t.join();
  } else {
    for (int c = 0; c < config.n_chains; ++c) work(c);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  auto& attrs = store.attributes();
  attrs["seed"] = std::to_string(config.seed);
  attrs["chains"] = std::to_string(config.n_chains);
  attrs["iterations"] = std::to_string(config.n_iterations);
  attrs["warmup"] = std::to_string(config.n_warmup);
  attrs["target_accept"] = text::format_double(config.target_accept);
  attrs["max_tree_depth"] = std::to_string(config.max_tree_depth);
  for (int c = 0; c < config.n_chains; ++c) {
    attrs["chain" + std::to_string(c + 1) + ".step_size"] =
        text::format_double(adaptation[static_cast<std::size_t>(c)].step_size);
  }
  return store;
}

DrawsStore run_chains(const DensityModel& target, const SamplerConfig& config) {
  std::vector<AdaptationResult> adaptation;
  return run_chains(target, config, adaptation);
}

}  // namespace bridgeord
