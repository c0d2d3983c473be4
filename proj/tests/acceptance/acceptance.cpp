// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Pass criterion numbers as arguments to run
// a subset, e.g. `acceptance 1 2 7`.

#include "cli.hpp"
#include "oracles.hpp"

#include "bridgeord/bridge.hpp"
#include "bridgeord/diagnostics.hpp"
#include "bridgeord/fileio.hpp"
#include "bridgeord/model.hpp"
#include "bridgeord/nuts.hpp"
#include "bridgeord/posterior.hpp"
#include "bridgeord/ppc.hpp"
#include "bridgeord/selection.hpp"
#include "bridgeord/simulate.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

using namespace bridgeord;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(double x, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << x;
  return s.str();
}

// ---------------------------------------------------------------------------

Outcome distribution_correctness() {
  double worst_mass = 0.0;
  double worst_var = 0.0;
  const double grid[] = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  for (double phi : grid) {
    const double mass = oracle::integrate_line([&](double x) { return oracle::bridge_pdf_direct(x, phi); });
    const double second = oracle::integrate_line([&](double x) {
      const double f = oracle::bridge_pdf_direct(x, phi);
      return f > 0.0 ? x * x * f : 0.0;
    });
    worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
    worst_var = std::max(worst_var, std::abs(bridge_variance(BridgeParam(phi)) / second - 1.0));
    for (double phi_z : grid) {
      const double m = oracle::integrate_line([&](double x) { return oracle::modified_bridge_pdf_direct(x, phi, phi_z); });
      const double s = oracle::integrate_line([&](double x) {
        const double f = oracle::modified_bridge_pdf_direct(x, phi, phi_z);
        return f > 0.0 ? x * x * f : 0.0;
      });
      worst_mass = std::max(worst_mass, std::abs(m - 1.0));
      worst_var = std::max(worst_var, std::abs(modified_bridge_variance(ModifiedBridgeParam(phi, phi_z)) / s - 1.0));
    }
  }
  const double pi2_error = std::abs(bridge_variance(BridgeParam(0.5)) - std::numbers::pi * std::numbers::pi);
  const bool pass = worst_mass < 1e-8 && worst_var < 1e-6 && pi2_error < 1e-12;
  return {pass, "max |mass-1| " + fmt(worst_mass) + ", max variance rel err " + fmt(worst_var) +
                    ", |var(0.5)-pi^2| " + fmt(pi2_error)};
}

Outcome bridging_identity() {
  double worst = 0.0;
  const double phis[] = {0.6, 0.8, 0.95};
  for (double pu : phis) {
    for (double pv : phis) {
      for (int k = 0; k <= 32; ++k) {
        const double c = -4.0 + 0.25 * k;
        const double quad = oracle::integrate_line([&](double u) {
          const double inner = oracle::integrate_line(
              [&](double v) { return logistic(c - u - v) * oracle::bridge_pdf_direct(v, pv); });
          return inner * oracle::modified_bridge_pdf_direct(u, pu, pv);
        });
        worst = std::max(worst, std::abs(quad - logistic(pu * pv * c)));
      }
    }
  }
  return {worst < 1e-6, "max abs deviation " + fmt(worst) + " over 297 grid points"};
}

Outcome gradient_correctness() {
  const auto g = oracle::small_fixture(21);
  if (g.data.n_obs() < 20 || g.data.n_regions < 3 || g.data.n_families() < 6) return {false, "fixture too small"};
  RandomStream rng(22, 0);
  double worst = 0.0;
  int coords = 0;
  for (Level level : {Level::fixed, Level::two_level, Level::three_level}) {
    const ModelSpec spec{3, 3, level};
    const ParamLayout layout(spec, g.data.n_regions, g.data.n_families());
    for (int rep = 0; rep < 3; ++rep) {
      Eigen::VectorXd pv(layout.size());
      for (int i = 0; i < pv.size(); ++i) pv[i] = 2.0 * rng.uniform() - 1.0;
      const auto value = log_posterior_and_grad(pv, g.data, spec);
      for (int i = 0; i < pv.size(); ++i) {
        const double fd = oracle::central_difference(
            [&](double s) {
              Eigen::VectorXd q = pv;
              q[i] = s;
              return log_posterior_and_grad(q, g.data, spec).value;
            },
            pv[i], 1e-6);
        worst = std::max(worst, std::abs(value.grad[i] - fd) / std::max(1.0, std::abs(fd)));
        ++coords;
      }
    }
  }
  return {worst < 1e-5, std::to_string(g.data.n_obs()) + " observations, " + std::to_string(coords) +
                            " coordinates, max rel err " + fmt(worst)};
}

class CorrelatedGaussian : public DensityModel {
 public:
  explicit CorrelatedGaussian(Eigen::MatrixXd cov) : cov_(std::move(cov)), precision_(cov_.inverse()) {}
  int dimension() const override { return static_cast<int>(cov_.rows()); }
  double log_density_gradient(const Eigen::VectorXd& q, Eigen::VectorXd& grad) const override {
    grad = -precision_ * q;
    return 0.5 * q.dot(grad);
  }
  const Eigen::MatrixXd& cov() const { return cov_; }

 private:
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd precision_;
};

Outcome sampler_calibration() {
  const int d = 10;
  Eigen::MatrixXd cov(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const double si = 0.5 + 0.25 * i;
      const double sj = 0.5 + 0.25 * j;
      cov(i, j) = si * sj * std::pow(0.7, std::abs(i - j));
    }
  }
  const CorrelatedGaussian target(cov);
  SamplerConfig cfg;
  cfg.seed = 2024;
  const DrawsStore store = run_chains(target, cfg);
  double worst_z = 0.0, worst_var = 0.0, worst_rhat = 0.0;
  for (int i = 0; i < d; ++i) {
    const auto x = store.pooled(i);
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(x.size() - 1);
    const double n_eff = *ess(store.by_chain(i));
    worst_z = std::max(worst_z, std::abs(mean) / std::sqrt(cov(i, i) / n_eff));
    worst_var = std::max(worst_var, std::abs(var / cov(i, i) - 1.0));
    worst_rhat = std::max(worst_rhat, *rhat(store.by_chain(i)));
  }
  return {worst_z < 4.0 && worst_var < 0.1 && worst_rhat < 1.01,
          "max |mean|/se " + fmt(worst_z) + ", max variance rel err " + fmt(worst_var) + ", max R-hat " +
              fmt(worst_rhat, 5)};
}

// Fits shared by the recovery, ordering and predictive-check criteria.
struct Replication {
  std::map<Level, CriteriaReport> criteria;
  std::map<Level, double> exact_match;
  double max_sum_error = 0.0;
  std::vector<RecoveryRow> recovery;
  double max_rhat = 0.0;
};

TrueParams recovery_truth() {
  TrueParams t;
  t.level = Level::three_level;
  t.alpha_c = Eigen::Vector2d(-0.3, 1.5);
  t.beta_c = Eigen::Vector3d(0.5, -0.8, 1.2);
  t.phi_ustar = 0.9;
  t.phi_v = 0.8;
  t.n_regions = 15;
  t.families_per_region.assign(15, 40);
  t.family_sizes = {2, 3, 4};
  t.covariates.assign(3, CovariateLaw{});
  return t;
}

const std::vector<Replication>& replications() {
  static const std::vector<Replication> reps = [] {
    std::vector<Replication> out;
    const TrueParams truth = recovery_truth();
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      RandomStream rng(seed, 0);
      const auto g = generate(truth, rng);
      Replication rep;
      for (Level level : {Level::fixed, Level::two_level, Level::three_level}) {
        const auto start = std::chrono::steady_clock::now();
        const ModelSpec spec{3, 3, level};
        SamplerConfig cfg;
        cfg.seed = seed;
        const DrawsStore store = fit_model(g.data, spec, cfg);
        rep.criteria[level] = criteria(pointwise_from_store(store, g.data, spec));
        const DiffTable table = ppc_report(store, g.data, spec, seed);
        for (const auto& row : table.rows) {
          if (row.code == 0) rep.exact_match[level] = row.mean;
        }
        for (Eigen::Index r = 0; r < table.replicate_percent.rows(); ++r) {
          rep.max_sum_error = std::max(rep.max_sum_error, std::abs(table.replicate_percent.row(r).sum() - 100.0));
        }
        if (level == Level::three_level) {
          rep.recovery = score_recovery(store, truth);
          for (int c = 0; c < store.n_names(); ++c) {
            if (const auto r = rhat(store.by_chain(c))) rep.max_rhat = std::max(rep.max_rhat, *r);
          }
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cerr << "  replication " << seed << " " << to_string(level) << " fitted in " << fmt(secs, 3) << " s\n";
      }
      out.push_back(std::move(rep));
    }
    return out;
  }();
  return reps;
}

Outcome parameter_recovery() {
  const auto& reps = replications();
  std::map<std::string, int> covered;
  double worst_rhat = 0.0;
  for (const auto& rep : reps) {
    for (const auto& row : rep.recovery) covered[row.name] += row.covered ? 1 : 0;
    worst_rhat = std::max(worst_rhat, rep.max_rhat);
  }
  bool pass = covered.size() == 7 && worst_rhat < 1.05;
  std::string detail;
  for (const auto& [name, n] : covered) {
    pass = pass && n >= 4;
    detail += name + " " + std::to_string(n) + "/5, ";
  }
  return {pass, detail + "max R-hat " + fmt(worst_rhat, 5)};
}

Outcome criteria_ordering() {
  int wins = 0;
  std::string detail;
  for (const auto& rep : replications()) {
    const auto& f = rep.criteria.at(Level::fixed);
    const auto& t = rep.criteria.at(Level::two_level);
    const auto& h = rep.criteria.at(Level::three_level);
    const bool best = h.lpml.lpml > std::max(f.lpml.lpml, t.lpml.lpml) &&
                      h.waic.waic < std::min(f.waic.waic, t.waic.waic) && h.dic.dic < std::min(f.dic.dic, t.dic.dic);
    wins += best ? 1 : 0;
    detail += "[LPML " + fmt(f.lpml.lpml, 6) + "/" + fmt(t.lpml.lpml, 6) + "/" + fmt(h.lpml.lpml, 6) + "] ";
  }
  return {wins >= 4, "three-level best on all criteria in " + std::to_string(wins) + "/5; " + detail};
}

Outcome criteria_arithmetic() {
  using Big = boost::multiprecision::cpp_bin_float_50;
  RandomStream rng(77, 0);
  const int m = 100, n = 50;
  PointwiseLogLik pll;
  pll.draws.resize(m, n);
  Eigen::RowVectorXd plugin(n);
  for (int l = 0; l < m; ++l) {
    for (int k = 0; k < n; ++k) pll.draws(l, k) = -3.0 * rng.uniform() - 0.01;
  }
  for (int k = 0; k < n; ++k) plugin[k] = -3.0 * rng.uniform() - 0.01;
  pll.plugin = plugin;
  const CriteriaReport got = criteria(pll);

  Big lppd = 0, p_waic = 0, lpml = 0, dbar = 0, dhat = 0;
  for (int k = 0; k < n; ++k) {
    Big mean_lik = 0, mean_inv = 0, mean_ll = 0;
    for (int l = 0; l < m; ++l) {
      const Big ll = pll.draws(l, k);
      mean_lik += exp(ll);
      mean_inv += exp(-ll);
      mean_ll += ll;
    }
    mean_lik /= m;
    mean_inv /= m;
    mean_ll /= m;
    Big var = 0;
    for (int l = 0; l < m; ++l) var += (Big(pll.draws(l, k)) - mean_ll) * (Big(pll.draws(l, k)) - mean_ll);
    var /= m;
    lppd += log(mean_lik);
    p_waic += var;
    lpml -= log(mean_inv);
    dbar += -2 * mean_ll;
    dhat += -2 * Big(plugin[k]);
  }
  const double waic = static_cast<double>(-2 * (lppd - p_waic));
  const double dic = static_cast<double>(2 * dbar - dhat);
  auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
  const double worst =
      std::max({rel(got.waic.waic, waic), rel(got.lpml.lpml, static_cast<double>(lpml)), rel(got.dic.dic, dic)});

  PointwiseLogLik flat;
  flat.draws = Eigen::MatrixXd::Constant(20, 2, -0.6931471805599453);
  flat.plugin = Eigen::RowVectorXd::Constant(2, -0.6931471805599453);
  const CriteriaReport c = criteria(flat);
  const double closed = 4.0 * std::log(2.0);
  PointwiseLogLik single;
  single.draws = Eigen::MatrixXd::Constant(1, 3, -1.5);
  single.draws(0, 1) = -0.25;
  const double single_lpml = bridgeord::lpml(single).lpml;
  const bool degenerate = std::abs(c.waic.waic - closed) < 1e-12 && std::abs(c.dic.dic - closed) < 1e-12 &&
                          std::abs(c.lpml.lpml + closed / 2.0) < 1e-12 && std::abs(single_lpml + 3.25) < 1e-12;
  return {worst < 1e-8 && degenerate,
          "max rel err vs 50-digit brute force " + fmt(worst) + (degenerate ? ", degenerate cases exact" : ", degenerate cases off")};
}

Outcome ppc_behavior() {
  int better = 0;
  double worst_sum = 0.0;
  std::string detail;
  for (const auto& rep : replications()) {
    const double f = rep.exact_match.at(Level::fixed);
    const double h = rep.exact_match.at(Level::three_level);
    better += h > f ? 1 : 0;
    worst_sum = std::max(worst_sum, rep.max_sum_error);
    detail += fmt(f, 4) + "->" + fmt(h, 4) + " ";
  }
  return {better == 5 && worst_sum < 1e-6, "exact-match % fixed->three-level: " + detail + "; max |sum-100| " +
                                               fmt(worst_sum)};
}

Outcome interpretation_arithmetic() {
  const double a = effect_interpretation(0.244, EffectKind::odds_percent());
  const double b = effect_interpretation(0.173, EffectKind::odds_percent());
  const double c = effect_interpretation(0.293, EffectKind::log_covariate_percent(1.1));
  const bool pass = std::abs(a - 27.63) < 0.01 && std::abs(b - 18.89) < 0.01 && std::abs(c - 2.83) < 0.01;
  return {pass, fmt(a, 6) + ", " + fmt(b, 6) + ", " + fmt(c, 6)};
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "bridgeord");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) std::cerr << "  command failed (" << code << "): " << err.str();
  return code;
}

std::map<std::string, std::string> run_pipeline(const fs::path& root) {
  fs::remove_all(root);
  fs::create_directories(root);
  const auto p = [&](const std::string& s) { return (root / s).string(); };
  write_file_atomic(p("truth.txt"),
                    "level = three\nalpha_c = -0.3, 1.5\nbeta_c = 0.5, -0.8\nphi_ustar = 0.9\nphi_v = 0.8\n"
                    "regions = 5\nfamilies_per_region = 6\nfamily_sizes = 2, 3, 4\n");
  int rc = cli({"simulate", "--truth", p("truth.txt"), "--seed", "17", "--out", p("sim")});
  for (const char* model : {"fixed", "three"}) {
    rc |= cli({"fit", "--data", p("sim/data.csv"), "--encoding", p("sim/encoding.txt"), "--model", model, "--chains",
               "2", "--iters", "400", "--warmup", "200", "--seed", "9", "--out", p(std::string("fit_") + model)});
  }
  rc |= cli({"fit", "--data", p("sim/data.csv"), "--encoding", p("sim/encoding.txt"), "--model", "two", "--chains",
             "2", "--iters", "400", "--warmup", "200", "--seed", "9", "--draws-format", "binary", "--out",
             p("fit_two")});
  rc |= cli({"summarize", "--draws", p("fit_three/draws.csv"), "--truth", p("sim/truth.txt"), "--conditional-scale",
             "--out", p("summary")});
  rc |= cli({"compare", "--data", p("sim/data.csv"), "--encoding", p("sim/encoding.txt"), "--draws",
             p("fit_fixed/draws.csv"), p("fit_two/draws.bin"), p("fit_three/draws.csv"), "--out", p("compare")});
  rc |= cli({"ppc", "--draws", p("fit_three/draws.csv"), "--data", p("sim/data.csv"), "--encoding",
             p("sim/encoding.txt"), "--seed", "3", "--out", p("ppc")});
  rc |= cli({"diagnose", "--draws", p("fit_three/draws.csv"), "--out", p("diagnose")});
  std::map<std::string, std::string> files;
  if (rc != 0) return files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) files[fs::relative(entry.path(), root).string()] = read_file(entry.path().string());
  }
  return files;
}

Outcome determinism() {
  // Same location both times: manifests record the input paths.
  const fs::path base = fs::temp_directory_path() / "bridgeord_acceptance_determinism";
  const auto first = run_pipeline(base);
  const auto second = run_pipeline(base);
  if (first.empty() || second.empty()) return {false, "pipeline command failed"};
  int differing = 0;
  std::string names;
  for (const auto& [name, body] : first) {
    const auto it = second.find(name);
    if (it == second.end() || it->second != body) {
      ++differing;
      names += " " + name;
    }
  }
  const bool pass = differing == 0 && first.size() == second.size();
  fs::remove_all(base);
  return {pass, std::to_string(first.size()) + " files compared across two runs of every command" +
                    (pass ? "" : "; differing:" + names)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria_list = {
      {"distribution correctness", distribution_correctness},
      {"bridging identity", bridging_identity},
      {"gradient correctness", gradient_correctness},
      {"sampler calibration", sampler_calibration},
      {"parameter recovery", parameter_recovery},
      {"criteria ordering", criteria_ordering},
      {"criteria arithmetic", criteria_arithmetic},
      {"predictive check behavior", ppc_behavior},
      {"interpretation arithmetic", interpretation_arithmetic},
      {"determinism", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria_list.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(number)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria_list[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += o.pass ? 0 : 1;
    std::cout << "criterion " << number << " " << (o.pass ? "PASS" : "FAIL") << "  " << criteria_list[i].first
              << ": " << o.detail << " (" << fmt(secs, 3) << " s)" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
