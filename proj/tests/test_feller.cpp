#include <doctest.h>

#include <cmath>
#include <vector>

#include "catnet/feller.hpp"
#include "catnet/rng.hpp"
#include "catnet/stats.hpp"

using namespace catnet;

namespace {

constexpr std::size_t kDraws = 100000;

std::vector<double> draws(const FellerParams& p, double t, std::uint64_t seed) {
  std::vector<double> out(kDraws);
  for (std::size_t i = 0; i < kDraws; ++i) {
    Philox4x32 g(seed, i);
    out[i] = exact_transition_sample(p, t, g);
  }
  return out;
}

}  // namespace

TEST_CASE("transition sampler examples") {
  Philox4x32 g(1, 0);
  for (double t : {0.1, 1.0, 5.0}) CHECK(exact_transition_sample({0.0, 0.0, 1.0}, t, g) == 0.0);

  const auto s = draws({1.0, 1.0, 1.0}, 1.0, 3);
  const auto e = estimate(s);
  CHECK(std::abs(Estimate::z_score(e, 2.0)) < 3.5);
  for (double v : s) REQUIRE(v >= 0.0);

  const auto a = draws({1.0, 0.0, 1.0}, 1.0, 4);
  double zeros = 0;
  for (double v : a) zeros += v == 0.0;
  const double p0 = std::exp(-1.0);
  CHECK(std::abs(zeros / kDraws - p0) < 3.5 * binomial_se(p0, kDraws));
}

TEST_CASE("survival probability closed form and bound") {
  CHECK(survival_probability(0.0, 1.0, 1.0) == 0.0);
  CHECK(survival_probability(1.0, 1.0, 1.0) == doctest::Approx(0.632121).epsilon(1e-6));
  for (double h : {0.01, 0.5, 2.0, 10.0})
    for (double gm : {0.3, 1.0, 4.0})
      for (double t : {0.1, 1.0, 3.0})
        CHECK(survival_probability(h, gm, t) <= h / (t * gm) + 1e-15);
}

TEST_CASE("cluster decomposition examples") {
  Philox4x32 g(5, 0);
  for (int i = 0; i < 100; ++i) {
    const auto c = cluster_sample(0.0, 1.0, 1.0, g);
    CHECK(c.N == 0);
    CHECK(c.total == 0.0);
  }
  Accumulator total;
  double empty = 0;
  for (std::size_t i = 0; i < kDraws; ++i) {
    Philox4x32 r(6, i);
    const auto c = cluster_sample(1.0, 1.0, 1.0, r);
    REQUIRE(c.levels.size() == static_cast<std::size_t>(c.N));
    double sum = 0;
    for (double l : c.levels) sum += l;
    REQUIRE(sum == doctest::Approx(c.total));
    total.add(c.total);
    empty += c.N == 0;
  }
  CHECK(std::abs(Estimate::z_score(total.result(), 1.0)) < 3.5);
  CHECK(std::abs(empty / kDraws - std::exp(-1.0)) < 3.5 * binomial_se(std::exp(-1.0), kDraws));
}

TEST_CASE("path sampler examples") {
  Philox4x32 g(7, 0);
  const auto zero = path_sample({0.0, 0.0, 1.0}, 1.0, 16, g);
  for (double v : zero.values) CHECK(v == 0.0);
  CHECK(zero.integral == 0.0);
  CHECK(zero.times.size() == 17);
  CHECK(zero.times.back() == doctest::Approx(1.0));

  Accumulator integral;
  for (std::size_t i = 0; i < 20000; ++i) {
    Philox4x32 r(8, i);
    const auto p = path_sample({1.0, 1.0, 1.0}, 1.0, 64, r);
    for (double v : p.values) REQUIRE(v >= 0.0);
    integral.add(p.integral);
  }
  CHECK(std::abs(Estimate::z_score(integral.result(), 1.5)) < 3.5);
}

TEST_CASE("property: martingale for zero drift") {
  for (double t : {0.25, 0.5, 1.0, 2.0}) {
    const auto s = draws({1.3, 0.0, 0.8}, t, 10 + static_cast<std::uint64_t>(t * 4));
    CHECK(std::abs(Estimate::z_score(estimate(s), 1.3)) < 3.5);
  }
}

TEST_CASE("property: cluster total and exact sampler agree in law") {
  std::vector<double> a(kDraws), b(kDraws);
  for (std::size_t i = 0; i < kDraws; ++i) {
    Philox4x32 r(20, i), s(21, i);
    a[i] = cluster_sample(0.7, 1.2, 0.9, r).total;
    b[i] = exact_transition_sample({0.7, 0.0, 1.2}, 0.9, s);
  }
  CHECK(ks_statistic(a, b) < 0.01);
}

TEST_CASE("property: branching additivity") {
  std::vector<double> joint(kDraws), split(kDraws);
  for (std::size_t i = 0; i < kDraws; ++i) {
    Philox4x32 r(30, i), s(31, i);
    joint[i] = exact_transition_sample({1.5, 0.0, 1.0}, 0.7, r);
    split[i] = exact_transition_sample({0.4, 0.0, 1.0}, 0.7, s) +
               exact_transition_sample({1.1, 0.0, 1.0}, 0.7, s);
  }
  CHECK(ks_statistic(joint, split) < 0.01);
}

TEST_CASE("exact sampler matches a fine Euler oracle") {
  const std::size_t n = 20000;
  std::vector<double> exact(n), euler(n);
  for (std::size_t i = 0; i < n; ++i) {
    Philox4x32 r(40, i), s(41, i);
    exact[i] = exact_transition_sample({0.5, 0.7, 1.0}, 0.5, r);
    euler[i] = euler_transition_sample({0.5, 0.7, 1.0}, 0.5, 1e-3, s);
  }
  // Critical value of the two-sample KS test at the 0.1% level is about 0.0195.
  CHECK(ks_statistic(exact, euler) < 0.025);
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS(FellerParams{-1.0, 0.0, 1.0}.validate());
  CHECK_THROWS(FellerParams{1.0, 0.0, 0.0}.validate());
}
