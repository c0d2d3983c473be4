#include "bridgeord/simulate.hpp"

#include "bridgeord/bridge.hpp"
#include "bridgeord/errors.hpp"
#include "bridgeord/summary.hpp"
#include "bridgeord/text.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace bridgeord {
namespace {

std::string join(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? ", " : "") + text::format_double(v[i]);
  return out;
}

Eigen::VectorXd parse_vector(std::string_view s, const char* what) {
  std::vector<double> vals;
  if (!text::trim(s).empty()) {
    for (auto part : text::split(s, ',')) vals.push_back(text::parse_double(part, what));
  }
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

std::vector<int> parse_ints(std::string_view s, const char* what) {
  std::vector<int> out;
  for (auto part : text::split(s, ',')) out.push_back(static_cast<int>(text::parse_int(part, what)));
  return out;
}

// "normal(0, 1), bernoulli(0.5)" -> laws; commas inside parentheses belong to the law.
std::vector<CovariateLaw> parse_laws(std::string_view s) {
  std::vector<CovariateLaw> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto open = s.find('(', pos);
    const auto close = s.find(')', pos);
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
      throw ValidationError("malformed covariate law list '" + std::string(s) + "'");
    }
    std::string_view name = text::trim(s.substr(pos, open - pos));
    if (!name.empty() && name.front() == ',') name = text::trim(name.substr(1));
    const auto args = text::split(s.substr(open + 1, close - open - 1), ',');
    CovariateLaw law;
    if (name == "normal" && args.size() == 2) {
      law.a = text::parse_double(args[0], "normal mean");
      law.b = text::parse_double(args[1], "normal sd");
    } else if (name == "bernoulli" && args.size() == 1) {
      law.kind = CovariateLaw::Kind::bernoulli;
      law.a = text::parse_double(args[0], "bernoulli probability");
    } else {
      throw ValidationError("unknown covariate law '" + std::string(name) + "'");
    }
    out.push_back(law);
    pos = close + 1;
  }
  return out;
}

}  // namespace

std::string CovariateLaw::to_text() const {
  if (kind == Kind::bernoulli) return "bernoulli(" + text::format_double(a) + ")";
  return "normal(" + text::format_double(a) + ", " + text::format_double(b) + ")";
}

ModelSpec TrueParams::spec() const {
  return {static_cast<int>(alpha_c.size()) + 1, static_cast<int>(beta_c.size()), level};
}

void TrueParams::validate() const {
  if (alpha_c.size() < 1) throw ValidationError("truth needs at least one threshold");
  for (Eigen::Index a = 1; a < alpha_c.size(); ++a) {
    if (!(alpha_c[a] > alpha_c[a - 1])) throw ValidationError("true thresholds must be strictly increasing");
  }
  if (!alpha_c.allFinite() || !beta_c.allFinite()) throw ValidationError("true coefficients must be finite");
  auto check_phi = [](double phi, const char* name) {
    if (!(phi > 1e-12 && phi < 1.0 - 1e-12)) {
      throw ValidationError(std::string(name) + " must lie strictly inside (0, 1)");
    }
  };
  if (level != Level::fixed) check_phi(phi_v, "phi_v");
  if (level == Level::three_level) check_phi(phi_ustar, "phi_ustar");
  if (n_regions < 1) throw ValidationError("truth needs at least one region");
  if (static_cast<int>(families_per_region.size()) != n_regions) {
    throw ValidationError("families_per_region needs one entry per region");
  }
  for (int m : families_per_region) {
    if (m < 1) throw ValidationError("every region needs at least one family");
  }
  if (family_sizes.empty()) throw ValidationError("family_sizes must not be empty");
  for (int n : family_sizes) {
    if (n < 1) throw ValidationError("family sizes must be positive");
  }
  if (static_cast<Eigen::Index>(covariates.size()) != beta_c.size()) {
    throw ValidationError("one covariate law per coefficient is required");
  }
  for (const auto& law : covariates) {
    if (law.kind == CovariateLaw::Kind::normal && !(law.b > 0.0)) throw ValidationError("normal sd must be positive");
    if (law.kind == CovariateLaw::Kind::bernoulli && !(law.a >= 0.0 && law.a <= 1.0)) {
      throw ValidationError("bernoulli probability must lie in [0, 1]");
    }
  }
}

MarginalParams TrueParams::marginal() const {
  const double pu = level == Level::three_level ? phi_ustar : 1.0;
  const double pv = level == Level::fixed ? 1.0 : phi_v;
  return marginalize(alpha_c, beta_c, pu, pv);
}

std::string TrueParams::to_text() const {
  std::string out = "level = " + std::string(to_string(level)) + "\n";
  out += "alpha_c = " + join(alpha_c) + "\n";
  out += "beta_c = " + join(beta_c) + "\n";
  if (level == Level::three_level) out += "phi_ustar = " + text::format_double(phi_ustar) + "\n";
  if (level != Level::fixed) out += "phi_v = " + text::format_double(phi_v) + "\n";
  out += "regions = " + std::to_string(n_regions) + "\n";
  out += "families_per_region = ";
  const bool uniform = std::all_of(families_per_region.begin(), families_per_region.end(),
                                   [&](int m) { return m == families_per_region.front(); });
  if (uniform) {
    out += std::to_string(families_per_region.front());
  } else {
    for (std::size_t i = 0; i < families_per_region.size(); ++i) out += (i ? ", " : "") + std::to_string(families_per_region[i]);
  }
  out += "\nfamily_sizes = ";
  for (std::size_t i = 0; i < family_sizes.size(); ++i) out += (i ? ", " : "") + std::to_string(family_sizes[i]);
  out += "\ncovariates = ";
  for (std::size_t i = 0; i < covariates.size(); ++i) out += (i ? ", " : "") + covariates[i].to_text();
  out += "\n";
  return out;
}

TrueParams TrueParams::parse(std::string_view body) {
  std::map<std::string, std::string, std::less<>> kv;
  int line_no = 0;
  for (auto raw : text::split(body, '\n')) {
    ++line_no;
    const auto line = text::trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("truth line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    kv[std::string(text::trim(line.substr(0, eq)))] = std::string(text::trim(line.substr(eq + 1)));
  }
  auto take = [&](const char* key) -> std::string {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ValidationError(std::string("truth is missing '") + key + "'");
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto take_or = [&](const char* key, std::string fallback) {
    return kv.count(key) ? take(key) : fallback;
  };

  TrueParams t;
  t.level = parse_level(take("level"));
  t.alpha_c = parse_vector(take("alpha_c"), "alpha_c");
  t.beta_c = parse_vector(take_or("beta_c", ""), "beta_c");
  if (t.level == Level::three_level) t.phi_ustar = text::parse_double(take("phi_ustar"), "phi_ustar");
  if (t.level != Level::fixed) t.phi_v = text::parse_double(take("phi_v"), "phi_v");
  kv.erase("phi_ustar");
  kv.erase("phi_v");
  t.n_regions = static_cast<int>(text::parse_int(take("regions"), "regions"));
  t.families_per_region = parse_ints(take("families_per_region"), "families_per_region");
  if (t.families_per_region.size() == 1 && t.n_regions > 1) {
    t.families_per_region.assign(static_cast<std::size_t>(t.n_regions), t.families_per_region.front());
  }
  t.family_sizes = parse_ints(take("family_sizes"), "family_sizes");
  const std::string laws = take_or("covariates", "");
  if (laws.empty()) {
    t.covariates.assign(static_cast<std::size_t>(t.beta_c.size()), CovariateLaw{});
  } else {
    t.covariates = parse_laws(laws);
  }
  if (!kv.empty()) throw ValidationError("truth has unknown key '" + kv.begin()->first + "'");
  t.validate();
  return t;
}

GeneratedData generate(const TrueParams& truth, RandomStream& rng) {
  truth.validate();
  const ModelSpec spec = truth.spec();
  GeneratedData out;
  Dataset& d = out.data;
  d.n_regions = truth.n_regions;
  for (int i = 0; i < truth.n_regions; ++i) {
    d.region_labels.push_back("R" + std::to_string(i + 1));
    for (int j = 0; j < truth.families_per_region[static_cast<std::size_t>(i)]; ++j) {
      d.family_region.push_back(i);
      d.family_labels.push_back("R" + std::to_string(i + 1) + "F" + std::to_string(j + 1));
    }
  }
  if (spec.has_region_effects()) {
    out.u.resize(truth.n_regions);
    const ModifiedBridgeParam pu(truth.phi_ustar, truth.phi_v);
    for (int i = 0; i < truth.n_regions; ++i) out.u[i] = modified_bridge_sample(pu, rng);
  }
  if (spec.has_family_effects()) {
    out.v.resize(d.n_families());
    const BridgeParam pv(truth.phi_v);
    for (int j = 0; j < d.n_families(); ++j) out.v[j] = bridge_sample(pv, rng);
  }

  for (int j = 0; j < d.n_families(); ++j) {
    const int size = truth.family_sizes[rng.below(truth.family_sizes.size())];
    for (int k = 0; k < size; ++k) d.obs_family.push_back(j);
  }
  const int n = static_cast<int>(d.obs_family.size());
  const int p = spec.n_covariates;
  d.covariates.resize(n, p);
  for (int k = 0; k < n; ++k) {
    for (int c = 0; c < p; ++c) {
      const auto& law = truth.covariates[static_cast<std::size_t>(c)];
      d.covariates(k, c) = law.kind == CovariateLaw::Kind::normal ? law.a + law.b * rng.normal()
                                                                  : (rng.uniform() < law.a ? 1.0 : 0.0);
    }
  }
  for (int c = 0; c < p; ++c) d.covariate_names.push_back("x" + std::to_string(c + 1));

  ConstrainedParams cp;
  cp.alpha_c = truth.alpha_c;
  cp.beta_c = truth.beta_c;
  cp.u = out.u;
  cp.v = out.v;
  d.outcome.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const int f = d.obs_family[static_cast<std::size_t>(k)];
    const double eta = linear_predictor(cp, d.row(k), d.family_region[static_cast<std::size_t>(f)], f, spec);
    const double u = rng.uniform();
    int y = spec.n_categories;
    for (int a = 0; a < spec.n_thresholds(); ++a) {
      if (u <= logistic(cp.alpha_c[a] - eta)) {
        y = a + 1;
        break;
      }
    }
    d.outcome[static_cast<std::size_t>(k)] = y;
  }
  d.validate(spec);
  return out;
}

std::vector<RecoveryRow> score_recovery(const DrawsStore& store, const TrueParams& truth) {
  const MarginalParams m = truth.marginal();
  std::vector<std::pair<std::string, double>> targets;
  for (Eigen::Index a = 0; a < m.alpha_m.size(); ++a) targets.emplace_back("alpha_m[" + std::to_string(a + 1) + "]", m.alpha_m[a]);
  for (Eigen::Index k = 0; k < m.beta_m.size(); ++k) targets.emplace_back("beta_m[" + std::to_string(k + 1) + "]", m.beta_m[k]);
  if (truth.level == Level::three_level) targets.emplace_back("phi_ustar", truth.phi_ustar);
  if (truth.level != Level::fixed) targets.emplace_back("phi_v", truth.phi_v);

  std::vector<RecoveryRow> rows;
  for (const auto& [name, value] : targets) {
    const QuantitySummary s = summarize(store, store.require(name));
    rows.push_back({name, value, s.q025, s.q975, s.q025 <= value && value <= s.q975});
  }
  return rows;
}

}  // namespace bridgeord
