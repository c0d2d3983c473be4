#include "cli.hpp"

#include "bridgeord/dataset_io.hpp"
#include "bridgeord/draws_io.hpp"
#include "bridgeord/errors.hpp"
#include "bridgeord/fileio.hpp"
#include "bridgeord/posterior.hpp"
#include "bridgeord/ppc.hpp"
#include "bridgeord/selection.hpp"
#include "bridgeord/simulate.hpp"
#include "bridgeord/summary.hpp"
#include "bridgeord/text.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <numeric>

namespace bridgeord::cli {
namespace {

namespace fs = std::filesystem;
using text::format_double;

constexpr double kRhatFlag = 1.01;
constexpr int kDensityBins = 40;

struct Options {
  std::string data;
  std::string encoding;
  std::string model = "three";
  std::string out;
  std::string truth;
  std::string draws;
  std::vector<std::string> draws_list;
  std::string draws_format = "text";
  SamplerConfig sampler;
  bool conditional_scale = false;
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string maybe(const std::optional<double>& x) { return x ? format_double(*x) : "NA"; }

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

/// Ordered `key = value` lines for a run manifest.
class Manifest {
 public:
  explicit Manifest(std::string command) { add("command", std::move(command)); }
  void add(const std::string& key, const std::string& value) { body_ += key + " = " + value + "\n"; }
  const std::string& text() const { return body_; }

 private:
  std::string body_;
};

class OutputDir {
 public:
  explicit OutputDir(const std::string& dir) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, std::string_view content) {
    write_file_atomic(path(name), content);
    written_.push_back(name);
  }
  std::string written() const { return join(written_, ", "); }

 private:
  fs::path dir_;
  std::vector<std::string> written_;
};

void add_sampler_manifest(Manifest& m, const SamplerConfig& c) {
  m.add("chains", std::to_string(c.n_chains));
  m.add("iters", std::to_string(c.n_iterations));
  m.add("warmup", std::to_string(c.n_warmup));
  m.add("target_accept", format_double(c.target_accept));
  m.add("max_depth", std::to_string(c.max_tree_depth));
  m.add("seed", std::to_string(c.seed));
}

struct LoadedData {
  EncodingPlan plan;
  ModelSpec spec;
  LoadResult load;
};

LoadedData load_inputs(const Options& o, Level level) {
  LoadedData d;
  d.plan = EncodingPlan::load(o.encoding);
  d.spec = ModelSpec{d.plan.outcome.n_categories, d.plan.width(), level};
  d.spec.validate();
  d.load = load_dataset(o.data, d.plan, d.spec);
  return d;
}

bool is_effect(const std::string& name) { return name.starts_with("u[") || name.starts_with("v["); }

// Labels for beta rows: the design-column names recorded at fit time.
std::vector<std::string> attribute_list(const DrawsStore& store, const std::string& key) {
  const auto it = store.attributes().find(key);
  if (it == store.attributes().end() || it->second.empty()) return {};
  std::vector<std::string> out;
  for (auto part : text::split(it->second, '|')) out.emplace_back(part);
  return out;
}

std::string summary_csv(const DrawsStore& store, const ModelSpec& spec, bool conditional_scale) {
  const auto terms = attribute_list(store, "design_names");
  const auto labels = attribute_list(store, "outcome_labels");
  std::string out = "name,term,mean,sd,q2.5,q97.5,odds_change_pct\n";
  auto row = [&](const std::string& name, const std::string& term, bool odds) {
    const auto col = store.index_of(name);
    if (!col) return;
    const QuantitySummary s = summarize(store, *col);
    out += name + "," + csv_field(term) + "," + format_double(s.mean) + "," + format_double(s.sd) + "," +
           format_double(s.q025) + "," + format_double(s.q975) + ",";
    out += odds ? format_double(effect_interpretation(s.mean, EffectKind::odds_percent())) : "";
    out += "\n";
  };
  auto threshold_term = [&](int a) {
    if (static_cast<int>(labels.size()) == spec.n_categories) {
      return labels[static_cast<std::size_t>(a)] + "|" + labels[static_cast<std::size_t>(a) + 1];
    }
    return std::to_string(a + 1) + "|" + std::to_string(a + 2);
  };
  auto beta_term = [&](int k) {
    return static_cast<int>(terms.size()) == spec.n_covariates ? terms[static_cast<std::size_t>(k)] : std::string();
  };
  const char* scales[] = {"m", "c"};
  for (int s = 0; s < (conditional_scale ? 2 : 1); ++s) {
    const std::string suffix = scales[s];
    for (int a = 0; a < spec.n_thresholds(); ++a) {
      row("alpha_" + suffix + "[" + std::to_string(a + 1) + "]", threshold_term(a), false);
    }
    for (int k = 0; k < spec.n_covariates; ++k) {
      row("beta_" + suffix + "[" + std::to_string(k + 1) + "]", beta_term(k), s == 0);
    }
    if (s == 0) {
      row("phi_ustar", "region", false);
      row("phi_v", "family", false);
    }
  }
  return out;
}

struct DiagnosticsTable {
  std::string csv;
  std::vector<std::string> flagged;
};

DiagnosticsTable diagnostics_table(const DrawsStore& store) {
  DiagnosticsTable t;
  t.csv = "name,rhat,ess,flag\n";
  for (int c = 0; c < store.n_names(); ++c) {
    const QuantityDiagnostics d = diagnose(store, c);
    const bool flag = d.rhat && *d.rhat > kRhatFlag;
    if (flag) t.flagged.push_back(d.name);
    t.csv += d.name + "," + maybe(d.rhat) + "," + maybe(d.ess) + "," + (flag ? "rhat" : "") + "\n";
  }
  return t;
}

std::string effects_csv(const DrawsStore& store, const std::string& prefix, const std::vector<std::string>& labels,
                        const std::vector<std::string>& parents, const std::string& parent_header) {
  std::vector<QuantitySummary> rows;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    rows.push_back(summarize(store, store.require(prefix + "[" + std::to_string(i + 1) + "]")));
  }
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rows[a].mean < rows[b].mean; });
  std::string out = "rank,name,label," + (parent_header.empty() ? "" : parent_header + ",") + "mean,sd,q2.5,q97.5\n";
  for (std::size_t r = 0; r < order.size(); ++r) {
    const std::size_t i = order[r];
    out += std::to_string(r + 1) + "," + rows[i].name + "," + csv_field(labels[i]) + ",";
    if (!parent_header.empty()) out += csv_field(parents[i]) + ",";
    out += format_double(rows[i].mean) + "," + format_double(rows[i].sd) + "," + format_double(rows[i].q025) + "," +
           format_double(rows[i].q975) + "\n";
  }
  return out;
}

void print_elapsed(std::ostream& out, const char* what, std::chrono::steady_clock::time_point start) {
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out << what << " took " << format_double(std::round(sec * 100.0) / 100.0) << " s\n";
}

DrawsFormat parse_format(const std::string& name) {
  return name == "binary" ? DrawsFormat::binary : DrawsFormat::text;
}

int cmd_fit(const Options& o, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const Level level = parse_level(o.model);
  const LoadedData in = load_inputs(o, level);
  const Dataset& data = in.load.data;
  OutputDir dir(o.out);

  out << "fitting " << o.model << "-level model: " << data.n_obs() << " observations, " << data.n_regions
      << " regions, " << data.n_families() << " families\n";
  DrawsStore store = fit_model(data, in.spec, o.sampler);
  store.attributes()["design_names"] = join(in.plan.design_names(), "|");
  if (!in.plan.outcome.labels.empty()) store.attributes()["outcome_labels"] = join(in.plan.outcome.labels, "|");

  const DrawsFormat format = parse_format(o.draws_format);
  const std::string draws_name = format == DrawsFormat::binary ? "draws.bin" : "draws.csv";
  dir.write(draws_name, serialize_draws(store, format));
  dir.write("summary.csv", summary_csv(store, in.spec, o.conditional_scale));
  const DiagnosticsTable diag = diagnostics_table(store);
  dir.write("diagnostics.csv", diag.csv);
  if (in.spec.has_region_effects()) {
    dir.write("effects_region.csv", effects_csv(store, "u", data.region_labels, {}, ""));
  }
  if (in.spec.has_family_effects()) {
    std::vector<std::string> parents;
    for (int f : data.family_region) parents.push_back(data.region_labels[static_cast<std::size_t>(f)]);
    dir.write("effects_family.csv", effects_csv(store, "v", data.family_labels, parents, "region"));
  }
  dir.write("load_report.txt", format_load_report(in.load.report));

  int divergent = 0;
  for (int c = 0; c < store.n_chains(); ++c) {
    for (int i = 0; i < store.n_retained(); ++i) divergent += store.stats(c, i).divergent ? 1 : 0;
  }
  Manifest m("fit");
  m.add("data", o.data);
  m.add("dataset_hash", store.attribute("dataset_hash"));
  m.add("encoding", o.encoding);
  m.add("model", std::string(to_string(level)));
  add_sampler_manifest(m, o.sampler);
  m.add("draws_format", o.draws_format);
  m.add("conditional_scale", o.conditional_scale ? "true" : "false");
  m.add("divergent", std::to_string(divergent));
  m.add("rhat_flagged", std::to_string(diag.flagged.size()));
  m.add("outputs", dir.written() + ", manifest.txt");
  dir.write("manifest.txt", m.text());

  out << "retained " << store.total_draws() << " draws, " << divergent << " divergent, "
      << diag.flagged.size() << " quantities with R-hat > " << format_double(kRhatFlag) << "\n";
  print_elapsed(out, "fit", start);
  return kOk;
}

int cmd_summarize(const Options& o, std::ostream& out) {
  const DrawsStore store = load_draws(o.draws);
  if (store.total_draws() == 0) throw ValidationError("no retained draws in '" + o.draws + "'");
  const ModelSpec spec = spec_from_store(store);
  OutputDir dir(o.out);
  dir.write("summary.csv", summary_csv(store, spec, o.conditional_scale));
  dir.write("diagnostics.csv", diagnostics_table(store).csv);
  Manifest m("summarize");
  m.add("draws", o.draws);
  m.add("conditional_scale", o.conditional_scale ? "true" : "false");
  if (!o.truth.empty()) {
    const TrueParams truth = TrueParams::parse(read_file(o.truth));
    if (truth.level != spec.level) {
      throw ValidationError("truth describes a " + std::string(to_string(truth.level)) +
                            "-level model but the draws come from a " + std::string(to_string(spec.level)) +
                            "-level fit");
    }
    std::string csv = "name,truth,q2.5,q97.5,covered\n";
    int covered = 0;
    const auto rows = score_recovery(store, truth);
    for (const auto& r : rows) {
      csv += r.name + "," + format_double(r.truth) + "," + format_double(r.q025) + "," + format_double(r.q975) + "," +
             (r.covered ? "yes" : "no") + "\n";
      covered += r.covered ? 1 : 0;
    }
    dir.write("recovery.csv", csv);
    m.add("truth", o.truth);
    m.add("covered", std::to_string(covered) + "/" + std::to_string(rows.size()));
    out << covered << " of " << rows.size() << " true values inside their 95% intervals\n";
  }
  m.add("outputs", dir.written() + ", manifest.txt");
  dir.write("manifest.txt", m.text());
  return kOk;
}

int cmd_compare(const Options& o, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  struct Row {
    std::string model;
    std::string path;
    CriteriaReport report;
  };
  std::vector<Row> rows;
  std::string data_hash;
  for (const auto& path : o.draws_list) {
    const DrawsStore store = load_draws(path);
    if (store.total_draws() == 0) throw ValidationError("no retained draws in '" + path + "'");
    const ModelSpec spec = spec_from_store(store);
    Options per = o;
    const LoadedData in = load_inputs(per, spec.level);
    if (in.spec.n_categories != spec.n_categories || in.spec.n_covariates != spec.n_covariates) {
      throw ValidationError("'" + path + "' was fitted with a different encoding than '" + o.encoding + "'");
    }
    data_hash = dataset_hash(in.load.data);
    const std::string fitted_hash = store.attribute("dataset_hash");
    if (fitted_hash != data_hash) {
      throw ValidationError("dataset mismatch: '" + path + "' was fitted to dataset " + fitted_hash + " but '" +
                            o.data + "' hashes to " + data_hash);
    }
    rows.push_back({std::string(to_string(spec.level)), path, criteria(pointwise_from_store(store, in.load.data, spec))});
  }

  std::size_t best_lpml = 0, best_waic = 0, best_dic = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].report.lpml.lpml > rows[best_lpml].report.lpml.lpml) best_lpml = i;
    if (rows[i].report.waic.waic < rows[best_waic].report.waic.waic) best_waic = i;
    if (rows[i].report.dic.dic < rows[best_dic].report.dic.dic) best_dic = i;
  }
  std::string csv = "model,draws,lpml,waic,dic,lppd,p_waic,dbar,dhat,best_lpml,best_waic,best_dic\n";
  out << "model      LPML (max)      WAIC (min)      DIC (min)\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i].report;
    csv += rows[i].model + "," + csv_field(rows[i].path) + "," + format_double(r.lpml.lpml) + "," +
           format_double(r.waic.waic) + "," + format_double(r.dic.dic) + "," + format_double(r.waic.lppd) + "," +
           format_double(r.waic.rho) + "," + format_double(r.dic.dbar) + "," + format_double(r.dic.dhat) + "," +
           (i == best_lpml ? "*" : "") + "," + (i == best_waic ? "*" : "") + "," + (i == best_dic ? "*" : "") + "\n";
    char line[160];
    std::snprintf(line, sizeof line, "%-8s %12.2f%s %12.2f%s %12.2f%s\n", rows[i].model.c_str(), r.lpml.lpml,
                  i == best_lpml ? " *" : "  ", r.waic.waic, i == best_waic ? " *" : "  ", r.dic.dic,
                  i == best_dic ? " *" : "  ");
    out << line;
  }
  OutputDir dir(o.out);
  dir.write("criteria.csv", csv);
  Manifest m("compare");
  m.add("data", o.data);
  m.add("dataset_hash", data_hash);
  m.add("encoding", o.encoding);
  m.add("draws", join(o.draws_list, ", "));
  m.add("outputs", dir.written() + ", manifest.txt");
  dir.write("manifest.txt", m.text());
  print_elapsed(out, "compare", start);
  return kOk;
}

int cmd_ppc(const Options& o, std::ostream& out) {
  const DrawsStore store = load_draws(o.draws);
  if (store.total_draws() == 0) throw ValidationError("no retained draws in '" + o.draws + "'");
  const ModelSpec spec = spec_from_store(store);
  const LoadedData in = load_inputs(o, spec.level);
  const std::string hash = dataset_hash(in.load.data);
  if (hash != store.attribute("dataset_hash")) {
    throw ValidationError("dataset mismatch: '" + o.draws + "' was fitted to dataset " +
                          store.attribute("dataset_hash") + " but '" + o.data + "' hashes to " + hash);
  }
  const DiffTable table = ppc_report(store, in.load.data, spec, o.sampler.seed);
  OutputDir dir(o.out);
  const std::string rendered = format_diff_table(table);
  dir.write("ppc.txt", rendered);
  std::string csv = "diff,mean,sd,q2.5,q97.5\n";
  for (const auto& r : table.rows) {
    csv += std::to_string(r.code) + "," + format_double(r.mean) + "," + format_double(r.sd) + "," +
           format_double(r.q025) + "," + format_double(r.q975) + "\n";
  }
  dir.write("ppc.csv", csv);
  Manifest m("ppc");
  m.add("draws", o.draws);
  m.add("data", o.data);
  m.add("encoding", o.encoding);
  m.add("seed", std::to_string(o.sampler.seed));
  m.add("replicates", std::to_string(store.total_draws()));
  m.add("outputs", dir.written() + ", manifest.txt");
  dir.write("manifest.txt", m.text());
  out << rendered;
  return kOk;
}

int cmd_diagnose(const Options& o, std::ostream& out) {
  const DrawsStore store = load_draws(o.draws);
  if (store.total_draws() == 0) throw ValidationError("no retained draws in '" + o.draws + "'");
  const DiagnosticsTable diag = diagnostics_table(store);

  int max_depth = 10;
  if (const auto it = store.attributes().find("max_tree_depth"); it != store.attributes().end()) {
    max_depth = static_cast<int>(text::parse_int(it->second, "max_tree_depth"));
  }
  int divergent = 0, saturated = 0;
  for (int c = 0; c < store.n_chains(); ++c) {
    for (int i = 0; i < store.n_retained(); ++i) {
      divergent += store.stats(c, i).divergent ? 1 : 0;
      saturated += store.stats(c, i).tree_depth >= max_depth ? 1 : 0;
    }
  }

  // Plot data covers the model parameters and the log density, not every random effect.
  std::vector<int> cols;
  for (int c = 0; c < store.n_names(); ++c) {
    if (!is_effect(store.names()[static_cast<std::size_t>(c)])) cols.push_back(c);
  }
  std::string trace = "chain,iter,name,value\n";
  for (int col : cols) {
    for (int ch = 0; ch < store.n_chains(); ++ch) {
      for (int i = 0; i < store.n_retained(); ++i) {
        trace += std::to_string(ch + 1) + "," + std::to_string(i + 1) + "," + store.names()[static_cast<std::size_t>(col)] +
                 "," + format_double(store.at(ch, i, col)) + "\n";
      }
    }
  }
  for (int ch = 0; ch < store.n_chains(); ++ch) {
    for (int i = 0; i < store.n_retained(); ++i) {
      trace += std::to_string(ch + 1) + "," + std::to_string(i + 1) + ",lp__," +
               format_double(store.stats(ch, i).log_density) + "\n";
    }
  }

  std::string density = "name,chain,bin,lower,upper,density\n";
  for (int col : cols) {
    const auto pooled = store.pooled(col);
    const auto [lo_it, hi_it] = std::minmax_element(pooled.begin(), pooled.end());
    const double lo = *lo_it;
    const double width = (*hi_it > lo ? *hi_it - lo : 1.0) / kDensityBins;
    const auto chains = store.by_chain(col);
    for (std::size_t ch = 0; ch < chains.size(); ++ch) {
      std::vector<long> counts(kDensityBins, 0);
      for (double x : chains[ch]) {
        const int b = std::clamp(static_cast<int>((x - lo) / width), 0, kDensityBins - 1);
        ++counts[static_cast<std::size_t>(b)];
      }
      for (int b = 0; b < kDensityBins; ++b) {
        const double d = static_cast<double>(counts[static_cast<std::size_t>(b)]) /
                         (static_cast<double>(chains[ch].size()) * width);
        density += store.names()[static_cast<std::size_t>(col)] + "," + std::to_string(ch + 1) + "," +
                   std::to_string(b + 1) + "," + format_double(lo + b * width) + "," +
                   format_double(lo + (b + 1) * width) + "," + format_double(d) + "\n";
      }
    }
  }

  std::string report;
  report += "chains: " + std::to_string(store.n_chains()) + "\n";
  report += "retained draws per chain: " + std::to_string(store.n_retained()) + "\n";
  report += "quantities: " + std::to_string(store.n_names()) + "\n";
  report += "divergent transitions: " + std::to_string(divergent) + "\n";
  report += "transitions at max tree depth (" + std::to_string(max_depth) + "): " + std::to_string(saturated) + "\n";
  report += "quantities with R-hat > " + format_double(kRhatFlag) + ": " + std::to_string(diag.flagged.size()) + "\n";
  for (const auto& name : diag.flagged) report += "  " + name + "\n";

  OutputDir dir(o.out);
  dir.write("diagnostics.csv", diag.csv);
  dir.write("trace.csv", trace);
  dir.write("density.csv", density);
  dir.write("diagnose.txt", report);
  Manifest m("diagnose");
  m.add("draws", o.draws);
  m.add("outputs", dir.written() + ", manifest.txt");
  dir.write("manifest.txt", m.text());
  out << report;
  return kOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const TrueParams truth = TrueParams::parse(read_file(o.truth));
  RandomStream rng(o.sampler.seed, 0);
  const GeneratedData g = generate(truth, rng);
  OutputDir dir(o.out);
  dir.write("data.csv", format_dataset(g.data));
  dir.write("encoding.txt", numeric_plan(g.data, truth.spec().n_categories).to_text());
  dir.write("truth.txt", truth.to_text());
  std::string effects = "block,index,label,value\n";
  for (Eigen::Index i = 0; i < g.u.size(); ++i) {
    effects += "u," + std::to_string(i + 1) + "," + g.data.region_labels[static_cast<std::size_t>(i)] + "," +
               format_double(g.u[i]) + "\n";
  }
  for (Eigen::Index j = 0; j < g.v.size(); ++j) {
    effects += "v," + std::to_string(j + 1) + "," + g.data.family_labels[static_cast<std::size_t>(j)] + "," +
               format_double(g.v[j]) + "\n";
  }
  dir.write("effects.csv", effects);
  Manifest m("simulate");
  m.add("truth", o.truth);
  m.add("seed", std::to_string(o.sampler.seed));
  m.add("dataset_hash", dataset_hash(g.data));
  m.add("outputs", dir.written() + ", manifest.txt");
  dir.write("manifest.txt", m.text());
  out << "simulated " << g.data.n_obs() << " observations in " << g.data.n_regions << " regions and "
      << g.data.n_families() << " families\n";
  return kOk;
}

void add_sampler_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--model", o.model, "Model level")->check(CLI::IsMember({"fixed", "two", "three"}))->capture_default_str();
  cmd->add_option("--chains", o.sampler.n_chains, "Number of chains")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--iters", o.sampler.n_iterations, "Iterations per chain, warmup included")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--warmup", o.sampler.n_warmup, "Warmup iterations per chain")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--target-accept", o.sampler.target_accept, "Target acceptance statistic")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--max-depth", o.sampler.max_tree_depth, "Maximum tree depth")
      ->check(CLI::Range(1, 30))
      ->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Bayesian cumulative-logit models with Bridge random effects"};
  app.name(args.empty() ? "bridgeord" : fs::path(args.front()).filename().string());
  app.require_subcommand(1);

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset from a truth file");
  simulate->add_option("--truth", o.truth, "Truth file (key = value lines)")->required();
  simulate->add_option("--seed", o.sampler.seed, "Random seed")->capture_default_str();
  simulate->add_option("--out", o.out, "Output directory")->required();

  auto* fit = app.add_subcommand("fit", "Fit a model with NUTS");
  fit->add_option("--data", o.data, "Dataset CSV")->required();
  fit->add_option("--encoding", o.encoding, "Encoding sidecar")->required();
  add_sampler_flags(fit, o);
  fit->add_option("--seed", o.sampler.seed, "Random seed")->capture_default_str();
  fit->add_option("--out", o.out, "Output directory")->required();
  fit->add_flag("--conditional-scale", o.conditional_scale, "Also summarize conditional-scale parameters");
  fit->add_option("--draws-format", o.draws_format, "Draws file format")
      ->check(CLI::IsMember({"text", "binary"}))
      ->capture_default_str();

  auto* summarize_cmd = app.add_subcommand("summarize", "Summarize a draws file");
  summarize_cmd->add_option("--draws", o.draws, "Draws file")->required();
  summarize_cmd->add_option("--out", o.out, "Output directory")->required();
  summarize_cmd->add_flag("--conditional-scale", o.conditional_scale, "Also summarize conditional-scale parameters");
  summarize_cmd->add_option("--truth", o.truth, "Truth file to score interval coverage against");

  auto* compare = app.add_subcommand("compare", "Compare fitted models by LPML, WAIC and DIC");
  compare->add_option("--data", o.data, "Dataset CSV")->required();
  compare->add_option("--encoding", o.encoding, "Encoding sidecar")->required();
  compare->add_option("--draws", o.draws_list, "Draws files, one per model")->required()->expected(1, -1);
  compare->add_option("--out", o.out, "Output directory")->required();

  auto* ppc = app.add_subcommand("ppc", "Posterior predictive check of outcome differences");
  ppc->add_option("--draws", o.draws, "Draws file")->required();
  ppc->add_option("--data", o.data, "Dataset CSV")->required();
  ppc->add_option("--encoding", o.encoding, "Encoding sidecar")->required();
  ppc->add_option("--seed", o.sampler.seed, "Random seed")->capture_default_str();
  ppc->add_option("--out", o.out, "Output directory")->required();

  auto* diagnose_cmd = app.add_subcommand("diagnose", "Convergence diagnostics and plot data");
  diagnose_cmd->add_option("--draws", o.draws, "Draws file")->required();
  diagnose_cmd->add_option("--out", o.out, "Output directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (fit->parsed()) {
      o.sampler.validate();
      return cmd_fit(o, out);
    }
    if (simulate->parsed()) return cmd_simulate(o, out);
    if (summarize_cmd->parsed()) return cmd_summarize(o, out);
    if (compare->parsed()) return cmd_compare(o, out);
    if (ppc->parsed()) return cmd_ppc(o, out);
    if (diagnose_cmd->parsed()) return cmd_diagnose(o, out);
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const NonFiniteDensity& e) {
    err << "sampling error (" << e.block() << "): " << e.what() << "\n";
    return kSampling;
  } catch (const SamplingError& e) {
    err << "sampling error: " << e.what() << "\n";
    return kSampling;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const std::domain_error& e) {
    err << "validation error: " << e.what() << "\n";
    return kValidation;
  }
  return kUsage;
}

int run(int argc, char** argv) { return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr); }

}  // namespace bridgeord::cli
