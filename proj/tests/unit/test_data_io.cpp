#include "bridgeord/bridge.hpp"
#include "bridgeord/dataset_io.hpp"
#include "bridgeord/draws_io.hpp"
#include "bridgeord/encoding.hpp"
#include "bridgeord/errors.hpp"
#include "bridgeord/fileio.hpp"
#include "bridgeord/posterior.hpp"
#include "bridgeord/simulate.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

using namespace bridgeord;
using doctest::Approx;

namespace {

const char* kSidecar = R"(# survey encoding
health = outcome(good, fair, poor)
gender = categorical(Male*, Female)
work   = categorical(Full/part time*, Unemployed, Student, Retired, Housework, Other)
income = numeric(log)
)";

const char* kSixRows =
    "region,family,health,gender,work,income\n"
    "A,A1,good,Male,Student,100\n"
    "A,A1,fair,Female,Retired,250\n"
    "A,A2,poor,Male,Full/part time,80\n"
    "B,B1,good,Female,Other,400\n"
    "B,B2,fair,Male,Housework,120\n"
    "B,B2,good,Female,Unemployed,90\n";

ModelSpec spec_for(const EncodingPlan& plan, Level level = Level::three_level) {
  return {plan.outcome.n_categories, plan.width(), level};
}

std::string temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "bridgeord_unit";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

DrawsStore sample_store() {
  DrawsStore s({"alpha_m[1]", "beta_m[1]", "v[12]"}, 2, 3);
  RandomStream rng(1, 0);
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < 3; ++i) {
      for (int k = 0; k < 3; ++k) s.at(c, i, k) = rng.normal() * std::pow(10.0, 3 * k - 4);
      auto& st = s.stats(c, i);
      st.accept_stat = rng.uniform();
      st.tree_depth = 3 + i;
      st.n_leapfrog = 7 + i;
      st.divergent = (i == 1);
      st.step_size = 0.1 + 0.01 * c;
      st.energy = rng.normal();
      st.log_density = -100.0 * rng.uniform();
    }
  }
  s.at(0, 0, 0) = 1.0 / 3.0;
  s.at(1, 2, 2) = -0.0;
  s.attributes()["level"] = "three";
  s.attributes()["note"] = "a=b, c";
  return s;
}

}  // namespace

TEST_CASE("encoding sidecar and reference-cell coding") {
  const EncodingPlan plan = EncodingPlan::parse(kSidecar);
  CHECK(plan.outcome.column == "health");
  CHECK(plan.outcome.n_categories == 3);
  CHECK(plan.width() == 1 + 5 + 1);
  const auto* gender = plan.find("gender");
  REQUIRE(gender != nullptr);
  CHECK(encode("Male", *gender) == std::vector<double>{0.0});
  CHECK(encode("Female", *gender) == std::vector<double>{1.0});
  const auto student = encode("Student", *plan.find("work"));
  CHECK(student == std::vector<double>{0, 1, 0, 0, 0});
  CHECK(encode("Full/part time", *plan.find("work")) == std::vector<double>(5, 0.0));
  CHECK_THROWS_AS(encode("Martian", *gender), ValidationError);
  CHECK(plan.design_names()[0] == "gender=Female");
  CHECK(plan.design_names().back() == "log(income)");

  CHECK(EncodingPlan::parse(plan.to_text()).to_text() == plan.to_text());
  CHECK_THROWS_AS(EncodingPlan::parse("y = outcome(3)\ng = categorical(a, b)\n"), ValidationError);
  CHECK_THROWS_AS(EncodingPlan::parse("g = numeric\n"), ValidationError);
  CHECK_THROWS_AS(EncodingPlan::parse("y = outcome(3)\ng = wavelet\n"), ValidationError);
}

TEST_CASE("hand-written dataset loads densely") {
  const EncodingPlan plan = EncodingPlan::parse(kSidecar);
  const auto r = parse_dataset(kSixRows, plan, spec_for(plan));
  const Dataset& d = r.data;
  CHECK(d.n_regions == 2);
  CHECK(d.families_per_region() == std::vector<int>{2, 2});
  CHECK(d.family_region == std::vector<int>{0, 0, 1, 1});
  CHECK(d.obs_family == std::vector<int>{0, 0, 1, 2, 3, 3});
  CHECK(d.outcome == std::vector<int>{1, 2, 3, 1, 2, 1});
  CHECK(d.covariates(0, 6) == Approx(4.60517).epsilon(1e-6));
  CHECK(d.covariates(0, 6) == std::log(100.0));
  CHECK(d.covariates(0, 0) == 0.0);
  CHECK(d.covariates(1, 0) == 1.0);
  CHECK(d.covariates(0, 2) == 1.0);  // Student slot
  CHECK(r.report.n_families == 4);
  CHECK(r.report.outcome_counts[0].second == 3);
  const std::string report = format_load_report(r.report);
  CHECK(report.find("Female 3") != std::string::npos);

  // CRLF and interleaved family rows are accepted.
  std::string crlf;
  for (char c : std::string(kSixRows)) {
    if (c == '\n') crlf += '\r';
    crlf += c;
  }
  CHECK(parse_dataset(crlf, plan, spec_for(plan)).data.outcome == d.outcome);
  const auto shuffled = parse_dataset(
      "region,family,health,gender,work,income\n"
      "B,B2,fair,Male,Housework,120\n"
      "A,A1,good,Male,Student,100\n"
      "B,B1,good,Female,Other,400\n"
      "A,A1,fair,Female,Retired,250\n",
      plan, spec_for(plan));
  CHECK(shuffled.data.family_labels == std::vector<std::string>{"B2", "B1", "A1"});
  CHECK(shuffled.data.obs_family == std::vector<int>{0, 1, 2, 2});
}

TEST_CASE("load errors carry line numbers") {
  const EncodingPlan plan = EncodingPlan::parse(kSidecar);
  const ModelSpec spec = spec_for(plan);
  const std::string header = "region,family,health,gender,work,income\n";
  CHECK_THROWS_WITH_AS(parse_dataset("", plan, spec), doctest::Contains("empty"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_dataset(header + "A,A1,good,Male,Student,\n", plan, spec),
                       doctest::Contains("line 2: missing value"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_dataset(header + "A,A1,good,Male,Student,5\nA,A1,okay,Male,Student,5\n", plan, spec),
                       doctest::Contains("line 3"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_dataset(header + "A,A1,good,Robot,Student,5\n", plan, spec),
                       doctest::Contains("unknown level 'Robot'"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_dataset(header + "A,F7,good,Male,Student,5\nB,F7,good,Male,Student,5\n", plan, spec),
                       doctest::Contains("family 'F7'"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_dataset("region,family,health,gender,work\nA,A1,good,Male,Student\n", plan, spec),
                       doctest::Contains("income"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_dataset(header + "A,A1,good,Male,Student,0\n", plan, spec),
                       doctest::Contains("log"), ValidationError);
  CHECK_THROWS_AS(load_dataset(temp_path("does_not_exist.csv"), plan, spec), IoError);
}

TEST_CASE("centering is opt-in") {
  const EncodingPlan plan = EncodingPlan::parse("y = outcome(2)\nage = numeric(center)\n");
  const auto r = parse_dataset("region,family,y,age\nA,A1,1,30\nA,A1,2,50\n", plan, spec_for(plan));
  CHECK(r.data.covariates(0, 0) == -10.0);
  CHECK(r.report.centering.at(0).second == 40.0);
}

TEST_CASE("dataset save and load round trip") {
  const auto g = oracle::small_fixture(41);
  const EncodingPlan plan = numeric_plan(g.data, 3);
  const auto again = parse_dataset(format_dataset(g.data), EncodingPlan::parse(plan.to_text()), spec_for(plan));
  CHECK(again.data.outcome == g.data.outcome);
  CHECK(again.data.obs_family == g.data.obs_family);
  CHECK(again.data.family_region == g.data.family_region);
  CHECK(again.data.covariates == g.data.covariates);
  CHECK(dataset_hash(again.data) == dataset_hash(g.data));
}

TEST_CASE("draws round trip in both formats") {
  const DrawsStore s = sample_store();
  for (DrawsFormat f : {DrawsFormat::text, DrawsFormat::binary}) {
    const DrawsStore back = deserialize_draws(serialize_draws(s, f));
    CHECK(back == s);
    CHECK(std::signbit(back.at(1, 2, 2)));
    CHECK(back.attribute("note") == "a=b, c");
    CHECK(back.stats(0, 1) == s.stats(0, 1));
  }
  const std::string text = serialize_draws(s);
  CHECK(text.find("chain,iter,name,value\n1,1,alpha_m[1],") != std::string::npos);
  CHECK(text.find("2,3,v[12],-0\n") != std::string::npos);

  const std::string path = temp_path("draws.csv");
  save_draws(s, path);
  CHECK(load_draws(path) == s);
}

TEST_CASE("damaged draws files are rejected") {
  const DrawsStore s = sample_store();
  const std::string text = serialize_draws(s);
  CHECK_THROWS_AS(deserialize_draws(text.substr(0, text.size() / 2)), IoError);
  CHECK_THROWS_AS(deserialize_draws(text.substr(0, text.rfind("# end"))), IoError);
  std::string wrong_version = text;
  wrong_version.replace(wrong_version.find("draws 1"), 7, "draws 9");
  CHECK_THROWS_WITH_AS(deserialize_draws(wrong_version), doctest::Contains("version"), IoError);
  std::string dropped = text;
  const auto row = dropped.find("1,2,beta_m[1]");
  dropped.erase(row, dropped.find('\n', row) - row + 1);
  CHECK_THROWS_AS(deserialize_draws(dropped), IoError);
  CHECK_THROWS_AS(deserialize_draws(""), IoError);

  const std::string bin = serialize_draws(s, DrawsFormat::binary);
  CHECK_THROWS_AS(deserialize_draws(bin.substr(0, bin.size() - 3)), IoError);
  CHECK_THROWS_AS(deserialize_draws(bin.substr(0, 40)), IoError);
  CHECK_THROWS_AS(deserialize_draws(bin + "x"), IoError);
}

TEST_CASE("empty store round trips") {
  DrawsStore empty({"alpha_m[1]", "phi_v"}, 4, 0);
  for (DrawsFormat f : {DrawsFormat::text, DrawsFormat::binary}) {
    const DrawsStore back = deserialize_draws(serialize_draws(empty, f));
    CHECK(back == empty);
    CHECK(back.total_draws() == 0);
    CHECK(back.n_chains() == 4);
  }
  CHECK(deserialize_draws(serialize_draws(DrawsStore{})) == DrawsStore{});
}

TEST_CASE("truth files") {
  const char* body =
      "level = three\nalpha_c = -0.3, 1.5\nbeta_c = 0.5, -0.8, 1.2\nphi_ustar = 0.9\nphi_v = 0.8\n"
      "regions = 15\nfamilies_per_region = 40\nfamily_sizes = 2, 3, 4\n"
      "covariates = normal(0, 1), bernoulli(0.3), normal(2, 0.5)\n";
  const TrueParams t = TrueParams::parse(body);
  CHECK(t.families_per_region.size() == 15);
  CHECK(t.covariates[1].kind == CovariateLaw::Kind::bernoulli);
  CHECK(TrueParams::parse(t.to_text()).to_text() == t.to_text());
  CHECK_THROWS_AS(TrueParams::parse("level = three\nalpha_c = 1, 0\n"), ValidationError);
  CHECK_THROWS_AS(TrueParams::parse(std::string(body) + "colour = blue\n"), ValidationError);
  CHECK_THROWS_AS(TrueParams::parse(std::string(body) + "phi_v = 1\n"), ValidationError);

  RandomStream rng(1, 0);
  const auto g = generate(t, rng);
  CHECK(g.data.n_regions == 15);
  CHECK(g.data.n_families() == 600);
  CHECK(g.u.size() == 15);
  CHECK(g.v.size() == 600);
  CHECK(g.data.n_obs() >= 1200);
  CHECK(g.data.n_obs() <= 2400);
  const auto m = t.marginal();
  CHECK(m.alpha_m[0] == Approx(-0.3 * 0.72));
}

TEST_CASE("generator law") {
  TrueParams t;
  t.level = Level::three_level;
  t.alpha_c = Eigen::Vector2d(0.0, 1.0);
  t.beta_c = Eigen::VectorXd(0);
  t.phi_ustar = 1.0 - 1e-9;
  t.phi_v = 1.0 - 1e-9;
  t.n_regions = 1;
  t.families_per_region = {1};
  t.family_sizes = {100000};
  RandomStream rng(2, 0);
  const auto g = generate(t, rng);
  std::vector<double> freq(3, 0.0);
  for (int y : g.data.outcome) freq[static_cast<std::size_t>(y - 1)] += 1.0 / g.data.n_obs();
  const double expected[] = {0.5, logistic(1.0) - 0.5, 1.0 - logistic(1.0)};
  for (int a = 0; a < 3; ++a) {
    const double se = std::sqrt(expected[a] * (1 - expected[a]) / g.data.n_obs());
    CHECK(std::abs(freq[static_cast<std::size_t>(a)] - expected[a]) < 4 * se);
  }

  TrueParams wide;
  wide.level = Level::two_level;
  wide.alpha_c = Eigen::Vector2d(0.0, 1.0);
  wide.beta_c = Eigen::VectorXd(0);
  wide.phi_v = 0.7;
  wide.n_regions = 1;
  wide.families_per_region = {5000};
  wide.family_sizes = {1};
  RandomStream r2(3, 0);
  const auto w = generate(wide, r2);
  const double mean = w.v.mean();
  const double var = (w.v.array() - mean).square().sum() / (w.v.size() - 1);
  CHECK(std::abs(var / bridge_variance(BridgeParam(0.7)) - 1.0) < 0.05);

  RandomStream a(9, 0), b(9, 0);
  const auto ga = generate(wide, a);
  const auto gb = generate(wide, b);
  CHECK(ga.v == gb.v);
  CHECK(ga.data.outcome == gb.data.outcome);
}

TEST_CASE("log-likelihood at the truth matches the entropy rate") {
  // Per-observation expected log-probability given the effects, averaged over
  // the generator's law by quadrature, compared with the realized average.
  TrueParams t;
  t.level = Level::two_level;
  t.alpha_c = Eigen::Vector2d(-0.3, 1.5);
  t.beta_c = Eigen::VectorXd(0);
  t.phi_v = 0.8;
  t.n_regions = 1;
  t.families_per_region = {20000};
  t.family_sizes = {1};
  RandomStream rng(4, 0);
  const auto g = generate(t, rng);
  ConstrainedParams cp;
  cp.alpha_c = t.alpha_c;
  cp.beta_c = t.beta_c;
  cp.phi_v = t.phi_v;
  cp.v = g.v;
  const double realized = log_likelihood(cp, g.data, t.spec()) / g.data.n_obs();
  const double entropy = oracle::integrate_line([&](double v) {
    const auto p = category_probs(v, t.alpha_c);
    double h = 0.0;
    for (double q : p) if (q > 0.0) h += q * std::log(q);
    return h * oracle::bridge_pdf_direct(v, 0.8);
  });
  CHECK(std::isfinite(realized));
  CHECK(std::abs(realized / entropy - 1.0) < 0.1);
}

TEST_CASE("atomic file writes") {
  const std::string path = temp_path("atomic.txt");
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  CHECK(read_file(path) == "second");
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
  CHECK_THROWS_AS(write_file_atomic(temp_path("missing_dir/x/y.txt"), "z"), IoError);
}
