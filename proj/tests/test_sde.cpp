#include <doctest.h>

#include <cmath>
#include <vector>

#include "catnet/coefficients.hpp"
#include "catnet/errors.hpp"
#include "catnet/feller.hpp"
#include "catnet/rng.hpp"
#include "catnet/sde.hpp"
#include "catnet/stats.hpp"

using namespace catnet;

namespace {

BranchingNetwork two_catalyst() {
  const std::vector<Edge> e{{1, 2}, {3, 2}};
  return BranchingNetwork::build(3, e);
}

BranchingNetwork hypercycle(int d) {
  std::vector<Edge> e;
  for (int i = 1; i <= d; ++i) e.push_back({i, i % d + 1});
  return BranchingNetwork::build(d, e);
}

}  // namespace

TEST_CASE("drift and diffusion examples") {
  const auto net = two_catalyst();
  const auto field = CoefficientField::constant(3, 1, 1);
  const auto dd = drift_diffusion(net, field, std::vector<double>{2, 3, 4});
  CHECK(dd.diffusion_sq[1] == doctest::Approx(36.0));
  CHECK(dd.diffusion_sq[0] == doctest::Approx(4.0));
  CHECK(dd.drift == std::vector<double>{1, 1, 1});
  const auto zero = drift_diffusion(net, field, std::vector<double>{0, 3, 0});
  for (double v : zero.diffusion_sq) CHECK(v == 0.0);
  CHECK(s_product(net, std::vector<double>{2, 3, 4}) == doctest::Approx(9.0));
}

TEST_CASE("frozen dynamics stay at x0") {
  const std::vector<Edge> none;
  SDESystem sys{BranchingNetwork::build(2, none), CoefficientField::constant(2, 0, 1e-12)};
  sys.field.require_positive_gamma = false;
  SimConfig cfg;
  cfg.n_paths = 50;
  const std::vector<double> x0{0.7, 1.2};
  const auto ens = simulate(sys, x0, cfg);
  for (std::size_t p = 0; p < ens.n_paths; ++p)
    for (int i = 0; i < 2; ++i) CHECK(std::abs(ens.final_state(p)[i] - x0[i]) < 1e-4);
}

TEST_CASE("one-dimensional Euler mean and law match the Feller oracle") {
  const std::vector<Edge> none;
  SDESystem sys{BranchingNetwork::build(1, none), CoefficientField::constant(1, 1, 1)};
  SimConfig cfg;
  cfg.n_paths = 100000;
  cfg.seed = 12;
  const std::vector<double> x0{0.5};
  const auto ens = simulate(sys, x0, cfg);
  std::vector<double> xt(ens.n_paths), exact(ens.n_paths);
  for (std::size_t p = 0; p < ens.n_paths; ++p) {
    xt[p] = ens.final_state(p)[0];
    REQUIRE(xt[p] >= 0.0);
    Philox4x32 g(13, p);
    exact[p] = exact_transition_sample({0.5, 1.0, 1.0}, 1.0, g);
  }
  CHECK(std::abs(Estimate::z_score(estimate(xt), 1.5)) < 3.5);
  CHECK(ks_statistic(xt, exact) < 0.02);
}

TEST_CASE("property: simulate is deterministic and independent of worker count") {
  SDESystem sys{two_catalyst(), CoefficientField::constant(3, 1, 1)};
  SimConfig cfg;
  cfg.n_paths = 200;
  cfg.record_every = 100;
  const std::vector<double> x0{0.2, 1.0, 0.3};
  set_worker_count(1);
  const auto a = simulate(sys, x0, cfg);
  set_worker_count(4);
  const auto b = simulate(sys, x0, cfg);
  set_worker_count(1);
  CHECK(a.knots == b.knots);
  CHECK(a.integrals == b.integrals);
  CHECK(a.min_S_product == b.min_S_product);
  for (double v : a.knots) CHECK(v >= 0.0);
}

TEST_CASE("hypercycle monitor sees no exact zero products") {
  SDESystem sys{hypercycle(4), CoefficientField::constant(4, 1, 1)};
  SimConfig cfg;
  cfg.n_paths = 1000;
  cfg.seed = 3;
  const std::vector<double> x0{1, 1, 1, 1};
  const auto ens = simulate(sys, x0, cfg);
  const auto rep = s_product_monitor(ens, sys.net);
  CHECK(rep.n_paths == 1000);
  CHECK(rep.exact_zero == 0);
  CHECK(rep.negative_knots == 0);
}

TEST_CASE("blow-up is reported") {
  const std::vector<Edge> none;
  SDESystem sys{BranchingNetwork::build(1, none), CoefficientField::constant(1, 1e9, 1)};
  SimConfig cfg;
  cfg.n_paths = 4;
  CHECK_THROWS_AS(simulate(sys, std::vector<double>{1.0}, cfg), BlowUp);
}

TEST_CASE("frozen reference diffusion examples") {
  const std::vector<Edge> e{{1, 2}};
  const auto net = BranchingNetwork::build(2, e);
  const std::vector<double> x0{0, 1};
  const auto cls = classify_initial(net, x0);
  REQUIRE(cls.N_R == VertexSet{2});

  SimConfig cfg;
  const FrozenCoefficients fr{{1.0, 0.5}, {1.0, 1.0}};
  cfg.n_paths = 100000;
  cfg.dt = 1.0 / 64;
  cfg.seed = 17;
  const auto ens = simulate_A0(net, cls, fr, x0, cfg);
  std::vector<double> xt(ens.n_paths), z(ens.n_paths);
  for (std::size_t p = 0; p < ens.n_paths; ++p) {
    xt[p] = ens.final_state(p)[1];
    REQUIRE(ens.final_state(p)[0] >= 0.0);
  }
  CHECK(std::abs(Estimate::z_score(estimate(xt), 1.5)) < 3.5);

  // Given the catalyst integral, the reactant is Gaussian with variance 2 gamma0 I.
  std::size_t used = 0;
  for (std::size_t p = 0; p < ens.n_paths; ++p) {
    const double I = ens.integral(p, 0);
    if (I <= 0.0) continue;
    z[used++] = (xt[p] - 1.5) / std::sqrt(2.0 * I);
  }
  z.resize(used);
  REQUIRE(used > 50000);
  CHECK(std::abs(sample_skewness(z)) < 0.05);
  CHECK(std::abs(sample_excess_kurtosis(z)) < 0.1);
}

TEST_CASE("property: simulate_A0 is independent of worker count") {
  const auto net = two_catalyst();
  const std::vector<double> x0{0, 1, 0};
  const auto cls = classify_initial(net, x0);
  const auto fr = freeze(CoefficientField::constant(3, 1, 1), net, cls);
  SimConfig cfg;
  cfg.n_paths = 300;
  cfg.dt = 0.01;
  set_worker_count(1);
  const auto a = simulate_A0(net, cls, fr, x0, cfg);
  set_worker_count(3);
  const auto b = simulate_A0(net, cls, fr, x0, cfg);
  set_worker_count(1);
  CHECK(a.knots == b.knots);
  CHECK(a.integrals == b.integrals);
}
