#include "bridgeord/errors.hpp"
#include "bridgeord/random.hpp"
#include "bridgeord/selection.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <doctest.h>

#include <cmath>

using namespace bridgeord;
using doctest::Approx;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

// Straight evaluation of the criteria in 50-digit arithmetic without log-sum-exp.
struct BigCriteria {
  Big lppd, rho, waic, lpml, dbar, dhat, dic;
};

BigCriteria brute_force(const PointwiseLogLik& pll) {
  const int m = pll.n_draws();
  const int n = pll.n_obs();
  BigCriteria out{0, 0, 0, 0, 0, 0, 0};
  for (int j = 0; j < n; ++j) {
    Big mean_density = 0, mean_inverse = 0, mean_ll = 0;
    for (int l = 0; l < m; ++l) {
      const Big ll = pll.draws(l, j);
      mean_density += boost::multiprecision::exp(ll);
      mean_inverse += boost::multiprecision::exp(-ll);
      mean_ll += ll;
    }
    mean_density /= m;
    mean_inverse /= m;
    mean_ll /= m;
    Big var = 0;
    for (int l = 0; l < m; ++l) {
      const Big d = Big(pll.draws(l, j)) - mean_ll;
      var += d * d;
    }
    out.lppd += boost::multiprecision::log(mean_density);
    out.rho += var / m;
    out.lpml += boost::multiprecision::log(1 / mean_inverse);
  }
  out.waic = -2 * (out.lppd - out.rho);
  for (int l = 0; l < m; ++l) {
    Big row = 0;
    for (int j = 0; j < n; ++j) row += pll.draws(l, j);
    out.dbar += -2 * row;
  }
  out.dbar /= m;
  Big plug = 0;
  for (int j = 0; j < n; ++j) plug += (*pll.plugin)[j];
  out.dhat = -2 * plug;
  out.dic = 2 * out.dbar - out.dhat;
  return out;
}

PointwiseLogLik random_pll(int m, int n, std::uint64_t seed) {
  RandomStream rng(seed, 0);
  PointwiseLogLik pll;
  pll.draws.resize(m, n);
  for (int l = 0; l < m; ++l) {
    for (int j = 0; j < n; ++j) pll.draws(l, j) = std::log(0.02 + 0.97 * rng.uniform());
  }
  pll.plugin = pll.draws.colwise().mean();
  return pll;
}

double rel(double got, const Big& want) {
  return std::abs(static_cast<double>((Big(got) - want) / want));
}

}  // namespace

TEST_CASE("constant draws") {
  PointwiseLogLik pll;
  pll.draws = Eigen::MatrixXd::Constant(3, 2, std::log(0.5));
  pll.plugin = pll.draws.row(0);
  const auto w = waic(pll);
  CHECK(w.lppd == Approx(2 * std::log(0.5)).epsilon(1e-15));
  CHECK(w.rho == 0.0);
  CHECK(w.waic == Approx(-4 * std::log(0.5)).epsilon(1e-15));
  CHECK(w.waic == Approx(2.7726).epsilon(1e-4));
  const auto c = lpml(pll);
  CHECK(c.cpo[0] == Approx(0.5).epsilon(1e-15));
  const auto d = dic(pll);
  CHECK(d.dic == Approx(d.dbar).epsilon(1e-15));
  CHECK(d.dbar == Approx(d.dhat).epsilon(1e-15));
}

TEST_CASE("small hand fixtures") {
  PointwiseLogLik pll;
  pll.draws.resize(2, 2);
  pll.draws << std::log(0.5), std::log(0.25), std::log(0.25), std::log(0.5);
  pll.plugin = Eigen::RowVector2d(std::log(0.4), std::log(0.4));
  const auto w = waic(pll);
  // Each column: mean density 0.375; variance of {log .5, log .25} with 1/M is (log 2)^2 / 4.
  CHECK(w.lppd == Approx(2 * std::log(0.375)).epsilon(1e-14));
  CHECK(w.rho == Approx(2 * std::log(2.0) * std::log(2.0) / 4).epsilon(1e-14));
  const auto c = lpml(pll);
  CHECK(c.lpml == Approx(2 * std::log(1 / ((2 + 4) / 2.0))).epsilon(1e-14));
  const auto d = dic(pll);
  CHECK(d.dbar == Approx(-2 * std::log(0.125)).epsilon(1e-14));
  CHECK(d.dhat == Approx(-4 * std::log(0.4)).epsilon(1e-14));

  PointwiseLogLik one;
  one.draws = Eigen::MatrixXd(1, 3);
  one.draws << -0.2, -1.7, -0.4;
  CHECK(lpml(one).lpml == Approx(-2.3).epsilon(1e-15));
  CHECK_THROWS_AS(waic(one), ValidationError);
  CHECK_THROWS_AS(dic(one), ValidationError);
}

TEST_CASE("criteria match extended-precision brute force") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto pll = random_pll(100, 50, seed);
    const auto want = brute_force(pll);
    const auto report = criteria(pll);
    CHECK(rel(report.waic.lppd, want.lppd) < 1e-8);
    CHECK(rel(report.waic.rho, want.rho) < 1e-8);
    CHECK(rel(report.waic.waic, want.waic) < 1e-8);
    CHECK(rel(report.lpml.lpml, want.lpml) < 1e-8);
    CHECK(rel(report.dic.dbar, want.dbar) < 1e-8);
    CHECK(rel(report.dic.dhat, want.dhat) < 1e-8);
    CHECK(rel(report.dic.dic, want.dic) < 1e-8);
  }
  const auto small = random_pll(5, 3, 9);
  CHECK(rel(lpml(small).lpml, brute_force(small).lpml) < 1e-12);
}

TEST_CASE("invariants") {
  auto pll = random_pll(40, 20, 4);
  const auto w = waic(pll);
  CHECK(w.rho >= 0.0);
  CHECK(w.lppd >= pll.draws.colwise().mean().sum());
  // Column order does not matter.
  PointwiseLogLik rev = pll;
  rev.draws = pll.draws.rowwise().reverse();
  rev.plugin = pll.plugin->reverse();
  CHECK(waic(rev).waic == Approx(w.waic).epsilon(1e-13));
  CHECK(lpml(rev).lpml == Approx(lpml(pll).lpml).epsilon(1e-13));
  CHECK(dic(rev).dic == Approx(dic(pll).dic).epsilon(1e-13));
}

TEST_CASE("extreme log-likelihoods stay finite") {
  PointwiseLogLik pll;
  pll.draws.resize(3, 1);
  pll.draws << -650.0, -690.0, -1.0;
  pll.plugin = Eigen::RowVectorXd::Constant(1, -1.0);
  const auto c = lpml(pll);
  CHECK(std::isfinite(c.lpml));
  CHECK(c.lpml == Approx(-690.0 + std::log(3.0)).epsilon(1e-9));
  pll.draws(1, 0) = -std::numeric_limits<double>::infinity();
  CHECK_THROWS_WITH_AS(lpml(pll), doctest::Contains("observation 1"), ValidationError);
}
