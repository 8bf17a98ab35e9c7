#include <doctest.h>

#include <cmath>
#include <vector>

#include "catnet/coefficients.hpp"
#include "catnet/errors.hpp"
#include "catnet/quadrature.hpp"
#include "catnet/rng.hpp"
#include "catnet/sde.hpp"
#include "catnet/semigroup.hpp"
#include "catnet/stats.hpp"
#include "catnet/test_function.hpp"

using namespace catnet;

namespace {

struct TwoCatalyst {
  BranchingNetwork net = BranchingNetwork::build(3, std::vector<Edge>{{1, 2}, {3, 2}});
  std::vector<double> x0{0, 1, 0};
  InitialClassification cls = classify_initial(net, x0);
  FrozenCoefficients frozen = freeze(CoefficientField::constant(3, 1, 1), net, cls);
};

TestFunction cosine3() {
  return TestFunction("cos", 1.0,
                      {Factor::cosine(0.8, 0.0), Factor::cosine(0.8, 0.3), Factor::cosine(0.8, 0.6)});
}

TestFunction bump3() {
  return TestFunction("bump", 1.0,
                      {Factor::gaussian_bump(0.5, 0.5), Factor::gaussian_bump(0.5, 1.0),
                       Factor::gaussian_bump(0.5, 0.5)});
}

}  // namespace

TEST_CASE("eval_G closed forms") {
  TwoCatalyst s;
  const std::vector<double> xr{1.2}, yr{0.7}, z{0.3, 0.4};
  const auto one = TestFunction::constant(3, 2.5);
  CHECK(eval_G(s.frozen, s.cls, 0.9, xr, yr, z, one) == doctest::Approx(2.5));

  // Zero occupation collapses the Gaussian to a point mass at x + b0 t.
  const auto f = bump3();
  const std::vector<double> y0{0.0};
  const std::vector<double> at{0.3, 1.2 + 0.9, 0.4};
  CHECK(eval_G(s.frozen, s.cls, 0.9, xr, y0, z, f) == doctest::Approx(f.value(at)));

  // Cosine in the reactant coordinate: exp(-gamma0 y k^2) cos(k (x + b0 t) + phase).
  const TestFunction c("c", 1.0, {Factor::constant(1), Factor::cosine(1.3, 0.2), Factor::constant(1)});
  const double expected = std::exp(-1.0 * 0.7 * 1.3 * 1.3) * std::cos(1.3 * (1.2 + 0.9) + 0.2);
  CHECK(eval_G(s.frozen, s.cls, 0.9, xr, yr, z, c) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("property: eval_G agrees with Gauss-Hermite quadrature on random draws") {
  TwoCatalyst s;
  Philox4x32 g(77, 0);
  const std::vector<Factor> pool{Factor::cosine(0.9, 0.4), Factor::gaussian_bump(0.7, 0.3),
                                 Factor::exp_decay(0.4), Factor::smooth_indicator(-1, 2, 0.5)};
  // Order 64 resolves the smooth indicator only while the Gaussian width
  // stays below about 1.1; wider draws are checked against order 200.
  for (int trial = 0; trial < 200; ++trial) {
    const Factor& fac = pool[trial % pool.size()];
    const TestFunction f("f", 1.0, {Factor::constant(1), fac, Factor::constant(1)});
    const bool wide = trial >= 100;
    const double x = 4 * g.uniform() - 2, t = g.uniform();
    const double y = (wide ? 1.5 : 0.5) * g.uniform() + 0.01;
    const std::vector<double> xr{x}, yr{y}, z{0.5, 0.5};
    const double closed = eval_G(s.frozen, s.cls, t, xr, yr, z, f);
    const double quad = normal_expectation_gh([&](double u) { return fac(u); }, x + t,
                                              std::sqrt(2.0 * y), wide ? 200 : 64);
    CHECK(closed == doctest::Approx(quad).epsilon(1e-8).scale(1.0));
  }
}

TEST_CASE("pt_f on constants and at small t") {
  TwoCatalyst s;
  PtConfig cfg;
  cfg.n_paths = 500;
  const auto one = TestFunction::constant(3, 1.0);
  const auto e = pt_f(s.net, s.cls, s.frozen, s.x0, 0.7, one, cfg);
  CHECK(e.mean == 1.0);
  CHECK(e.std_err == 0.0);

  const auto f = bump3();
  const auto small = pt_f(s.net, s.cls, s.frozen, s.x0, 1e-4, f, cfg);
  CHECK(std::abs(small.mean - f.value(s.x0)) < 10 * small.std_err + 1e-3);
  CHECK_THROWS_AS(pt_f(s.net, s.cls, s.frozen, s.x0, 0.0, f, cfg), InvalidArgument);
}

TEST_CASE("pt_f is contractive") {
  TwoCatalyst s;
  PtConfig cfg;
  cfg.n_paths = 2000;
  for (double t : {0.1, 0.5, 2.0}) {
    for (const auto& f : {cosine3(), bump3()}) {
      const auto e = pt_f(s.net, s.cls, s.frozen, s.x0, t, f, cfg);
      CHECK(std::abs(e.mean) <= f.bound() + 4 * e.std_err);
    }
  }
}

TEST_CASE("moment oracle examples") {
  TwoCatalyst s;
  const auto m = moment_oracles(s.net, s.cls, s.frozen, s.x0, 1.0, 2);
  CHECK(m.mean_sum == doctest::Approx(2.0));
  CHECK(m.mean_integral == doctest::Approx(1.0));

  const auto z = moment_oracles(s.net, s.cls, s.frozen, std::vector<double>{0.3, 1.0, 0.4}, 0.0, 2);
  CHECK(z.mean_sum == doctest::Approx(0.7));
  CHECK(z.second_moment_sum == doctest::Approx(0.49));
  CHECK(z.second_moment_increment == 0.0);
  CHECK(z.mean_integral == 0.0);

  const auto net1 = BranchingNetwork::build(2, std::vector<Edge>{{1, 2}});
  const std::vector<double> x{0, 1};
  const auto cls1 = classify_initial(net1, x);
  const FrozenCoefficients fr1{{1, 1}, {1, 1}};
  CHECK(moment_oracles(net1, cls1, fr1, x, 1.0, 2).second_moment_sum == doctest::Approx(2.0));

  CHECK_THROWS_AS(moment_oracles(s.net, s.cls, s.frozen, s.x0, 1.0, 1), NotInNR);
}

TEST_CASE("moment identities hold and a corrupted sampler is caught") {
  TwoCatalyst s;
  const auto ok = verify_moments(s.net, s.cls, s.frozen, s.x0, 1.0, 100000, 5);
  CHECK(ok.pass);
  CHECK(ok.checks.size() == 4);
  const auto zero = verify_moments(s.net, s.cls, s.frozen, s.x0, 0.0, 1000, 5);
  CHECK(zero.pass);
  for (const auto& c : zero.checks) CHECK(c.z == 0.0);
  const auto bad = verify_moments(s.net, s.cls, s.frozen, s.x0, 1.0, 100000, 5, 1.5);
  CHECK_FALSE(bad.pass);
}

TEST_CASE("inverse moment scales like t^-2 from a zero catalyst") {
  const auto net = BranchingNetwork::build(2, std::vector<Edge>{{1, 2}});
  const std::vector<double> x{0, 1};
  const auto cls = classify_initial(net, x);
  const FrozenCoefficients fr{{1, 1}, {1, 1}};
  const std::vector<double> ts{0.25, 0.5, 1.0, 2.0};
  const auto rep = inverse_moment_probe(net, cls, fr, x, ts, 2, 1.0, 20000, 3);
  CHECK(std::abs(rep.loglog.slope + 2.0) <= 0.3);
  CHECK(rep.constant_spread <= 3.0);
  const double ratio = rep.rows[2].estimate.mean / rep.rows[1].estimate.mean;
  CHECK(std::abs(ratio / 0.25 - 1.0) <= 0.3);

  const FrozenCoefficients bad{{0, 1}, {1, 1}};
  CHECK_THROWS_AS(inverse_moment_probe(net, cls, bad, x, ts, 2, 1.0, 100, 3), PreconditionViolated);
}

TEST_CASE("derivatives of a constant vanish") {
  TwoCatalyst s;
  const auto one = TestFunction::constant(3, 1.0);
  const std::vector<double> ts{0.25, 0.5};
  const auto rep = derivative_scaling_probe(s.net, s.cls, s.frozen, one, s.x0, ts, 0.05, 200, 1, 16);
  for (const auto& r : rep.rows) {
    CHECK(std::abs(r.first.mean) < 1e-9);
    CHECK(std::abs(r.scaled_second.mean) < 1e-9);
  }
}

TEST_CASE("property: Chapman-Kolmogorov at (t, s) = (0.5, 0.5)") {
  TwoCatalyst s;
  SimConfig sim;
  sim.dt = 1.0 / 128;
  sim.T = 0.5;
  sim.n_paths = 2000;
  sim.seed = 101;
  const auto mid = simulate_A0(s.net, s.cls, s.frozen, s.x0, sim);
  for (const auto& f : {cosine3(), bump3()}) {
    PtConfig direct;
    direct.n_paths = 40000;
    direct.seed = 102;
    const auto lhs = pt_f(s.net, s.cls, s.frozen, s.x0, 1.0, f, direct);
    std::vector<double> inner(mid.n_paths);
    for (std::size_t p = 0; p < mid.n_paths; ++p) {
      const auto xt = mid.final_state(p);
      const std::vector<double> x(xt.begin(), xt.end());
      PtConfig c;
      c.n_paths = 100;
      c.n_steps = 64;
      c.seed = 1000 + p;
      inner[p] = pt_f(s.net, s.cls, s.frozen, x, 0.5, f, c).mean;
    }
    const auto rhs = estimate(inner);
    CHECK(std::abs(Estimate::z_score(lhs, rhs)) <= 3.0);
  }
}
