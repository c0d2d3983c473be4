#include "bridgeord/errors.hpp"
#include "bridgeord/posterior.hpp"
#include "bridgeord/ppc.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace bridgeord;
using doctest::Approx;

TEST_CASE("difference codes") {
  CHECK(diff_code(1, 3, 3) == -2);
  CHECK(diff_code(2, 2, 3) == 0);
  CHECK(diff_code(3, 2, 3) == 1);
  for (int a = 1; a <= 3; ++a) {
    for (int b = 1; b <= 3; ++b) CHECK(diff_code(a, b, 3) == -diff_code(b, a, 3));
  }
  CHECK_THROWS_AS(diff_code(0, 1, 3), ValidationError);
  CHECK_THROWS_AS(diff_code(1, 4, 3), ValidationError);
}

TEST_CASE("replicates follow the category law") {
  const auto g = oracle::small_fixture(21);
  const ModelSpec spec{3, 3, Level::three_level};
  ConstrainedParams cp;
  cp.alpha_c = Eigen::Vector2d(-0.3, 1.5);
  cp.beta_c = Eigen::Vector3d(0.5, -0.8, 1.2);
  cp.phi_ustar = 0.9;
  cp.phi_v = 0.8;
  cp.u = g.u;
  cp.v = g.v;

  const int reps = 4000;
  const int k = 0;
  const int f = g.data.obs_family[0];
  const auto probs = category_probs(linear_predictor(cp, g.data.row(k), g.data.family_region[f], f, spec), cp.alpha_c);
  std::vector<int> counts(3, 0);
  RandomStream rng(22, 0);
  for (int r = 0; r < reps; ++r) ++counts[static_cast<std::size_t>(simulate_replicate(cp, g.data, spec, rng)[0] - 1)];
  for (int a = 0; a < 3; ++a) {
    const double se = std::sqrt(probs[a] * (1 - probs[a]) / reps);
    CHECK(std::abs(counts[static_cast<std::size_t>(a)] / double(reps) - probs[a]) < 3 * se);
  }

  ConstrainedParams low = cp;
  low.alpha_c = Eigen::Vector2d(1000.0, 1001.0);
  RandomStream r2(1, 0);
  for (int y : simulate_replicate(low, g.data, spec, r2)) CHECK(y == 1);

  RandomStream a(5, 5), b(5, 5);
  CHECK(simulate_replicate(cp, g.data, spec, a) == simulate_replicate(cp, g.data, spec, b));

  ConstrainedParams missing = cp;
  missing.u.resize(0);
  CHECK_THROWS_AS(simulate_replicate(missing, g.data, spec, a), ValidationError);
}

TEST_CASE("tabulation partitions one hundred percent") {
  const std::vector<int> observed{1, 2, 3, 1, 2, 2, 3};
  std::vector<std::vector<int>> reps;
  RandomStream rng(3, 0);
  for (int r = 0; r < 50; ++r) {
    std::vector<int> sim(observed.size());
    for (int& y : sim) y = 1 + static_cast<int>(rng.below(3));
    reps.push_back(sim);
  }
  const DiffTable t = tabulate_diffs(observed, reps, 3);
  REQUIRE(t.rows.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(t.rows[static_cast<std::size_t>(i)].code == i - 2);
  double mean_total = 0.0;
  for (const auto& r : t.rows) mean_total += r.mean;
  CHECK(mean_total == Approx(100.0).epsilon(1e-12));
  for (Eigen::Index r = 0; r < t.replicate_percent.rows(); ++r) {
    CHECK(std::abs(t.replicate_percent.row(r).sum() - 100.0) < 1e-9);
  }

  const DiffTable exact = tabulate_diffs(observed, {observed, observed}, 3);
  CHECK(exact.rows[2].mean == 100.0);
  CHECK(exact.rows[0].mean == 0.0);
  CHECK(exact.rows[4].q975 == 0.0);

  // Binary outcomes still report the full -2..2 range.
  const DiffTable binary = tabulate_diffs({1, 2}, {{2, 1}}, 2);
  CHECK(binary.rows.size() == 5);
  CHECK(binary.rows[1].mean == 50.0);
  CHECK(binary.rows[3].mean == 50.0);
  // Wider outcome scales extend it.
  CHECK(tabulate_diffs({1, 5}, {{5, 1}}, 5).rows.size() == 9);
}

TEST_CASE("report over a store is reproducible") {
  const auto g = oracle::small_fixture(31);
  const ModelSpec spec{3, 3, Level::two_level};
  SamplerConfig cfg;
  cfg.n_chains = 2;
  cfg.n_iterations = 200;
  cfg.n_warmup = 100;
  const DrawsStore store = fit_model(g.data, spec, cfg);
  const DiffTable a = ppc_report(store, g.data, spec, 7);
  const DiffTable b = ppc_report(store, g.data, spec, 7);
  const DiffTable c = ppc_report(store, g.data, spec, 8);
  CHECK(a.replicate_percent == b.replicate_percent);
  CHECK_FALSE(a.replicate_percent == c.replicate_percent);
  CHECK(a.replicate_percent.rows() == store.total_draws());
  const std::string text = format_diff_table(a);
  for (const char* label : {"-2", "-1", "0", "1", "2"}) CHECK(text.find(label) != std::string::npos);
}
