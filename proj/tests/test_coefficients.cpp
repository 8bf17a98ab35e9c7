#include <doctest.h>

#include <cmath>
#include <vector>

#include "catnet/coefficients.hpp"
#include "catnet/errors.hpp"
#include "catnet/rng.hpp"

using namespace catnet;

namespace {

BranchingNetwork two_catalyst() {
  const std::vector<Edge> e{{1, 2}, {3, 2}};
  return BranchingNetwork::build(3, e);
}

}  // namespace

TEST_CASE("ramp is 1 inside r, 0 beyond 2r and monotone between") {
  CHECK(ramp(0.0, 0.5) == 1.0);
  CHECK(ramp(0.5, 0.5) == 1.0);
  CHECK(ramp(1.0, 0.5) == 0.0);
  CHECK(ramp(3.0, 0.5) == 0.0);
  CHECK(ramp(0.75, 0.5) == doctest::Approx(0.5));
  double prev = 1.0;
  for (double s = 0.5; s <= 1.0; s += 0.01) {
    const double v = ramp(s, 0.5);
    CHECK(v <= prev + 1e-15);
    prev = v;
  }
}

TEST_CASE("expression round trip through JSON") {
  const auto e = Expr::sum({Expr::constant(1.0), Expr::product({Expr::coordinate(3, 2),
                                                                Expr::affine(0.5, {0, 0, 2})})});
  const std::vector<double> x{0.3, 1.5, 0.25};
  const double v = e(x);
  CHECK(v == doctest::Approx(1.0 + 1.5 * (0.5 + 0.5)));
  const auto back = Expr::from_json(e.to_json(), 3);
  CHECK(back(x) == v);
  CHECK(Expr::constant(2.5).constant_value() == 2.5);
  CHECK_FALSE(Expr::coordinate(3, 1).constant_value().has_value());
}

TEST_CASE("coefficient condition sampling") {
  const auto net = two_catalyst();
  std::vector<std::vector<double>> samples{{0, 1, 0}, {1, 0, 2}, {0.5, 0.5, 0.5}};
  CHECK(validate_hypothesis2(CoefficientField::constant(3, 1, 1), net, samples).pass());

  auto neg = CoefficientField::constant(3, 1, 1);
  neg.b[0] = Expr::constant(-1.0);
  const auto r1 = validate_hypothesis2(neg, net, samples);
  CHECK_FALSE(r1.pass());
  bool found = false;
  for (const auto& v : r1.violations)
    found = found || (v.vertex == 1 && v.condition == "b_1(x)>0 at x_1=0 fails");
  CHECK(found);

  auto sq = CoefficientField::constant(3, 1, 1);
  sq.b[0] = Expr::product({Expr::coordinate(3, 1), Expr::coordinate(3, 1)});
  sq.growth_c = 1.0;
  const std::vector<std::vector<double>> far{{10, 0, 0}};
  const auto r2 = validate_hypothesis2(sq, net, far);
  REQUIRE(r2.violations.size() >= 1);
  CHECK(r2.violations[0].condition == "|b_1(x)|<=c(1+|x|) fails");
  CHECK(r2.violations[0].value == doctest::Approx(100.0));
}

TEST_CASE("freeze examples") {
  const auto net = two_catalyst();
  const auto cls = classify_initial(net, std::vector<double>{0, 1, 0});
  const auto fr = freeze(CoefficientField::constant(3, 1, 1), net, cls);
  CHECK(fr.b0 == std::vector<double>{1, 1, 1});
  CHECK(fr.gamma0 == std::vector<double>{1, 1, 1});

  // Vertex 2 is in N_2 here; a negative drift is clipped at 0.
  const auto pos = classify_initial(net, std::vector<double>{1, 1, 1});
  auto f = CoefficientField::constant(3, 1, 2);
  f.b[1] = Expr::constant(-2.0);
  const auto fp = freeze(f, net, pos);
  CHECK(fp.b0[1] == 0.0);
  CHECK(fp.gamma0[0] == doctest::Approx(2.0));

  // gamma0 of a degenerate reactant carries the factor x0_j.
  auto g = CoefficientField::constant(3, 1, 3);
  const auto cls2 = classify_initial(net, std::vector<double>{0, 2, 0});
  CHECK(freeze(g, net, cls2).gamma0[1] == doctest::Approx(6.0));
}

TEST_CASE("m0 examples") {
  const auto net = two_catalyst();
  const auto cls = classify_initial(net, std::vector<double>{0, 1, 0});
  CHECK(m0({{1, 1, 1}, {1, 1, 1}}, net, cls) == doctest::Approx(1.0));
  const auto pos = classify_initial(net, std::vector<double>{1, 1, 1});
  CHECK(m0({{1, 1, 1}, {2, 1, 1}}, net, pos) == doctest::Approx(2.0));
  CHECK(m0({{0.1, 1, 1}, {1, 1, 1}}, net, cls) == doctest::Approx(10.0));
  CHECK_THROWS_AS(check_frozen({{0, 1, 1}, {1, 1, 1}}, net, cls), FrozenDegenerate);
}

TEST_CASE("tilde field examples") {
  const auto net = two_catalyst();
  const auto field = CoefficientField::constant(3, 1, 1);
  const std::vector<double> x{0.3, 0.7, 0.2};

  const auto cls = classify_initial(net, std::vector<double>{0, 1, 0});
  const auto t = tilde_field(field, net, cls);
  CHECK(t.eval_gamma(2, x) == doctest::Approx(0.7));
  CHECK(t.eval_gamma(1, x) == doctest::Approx(1.0));
  CHECK(t.eval_gamma(3, x) == doctest::Approx(1.0));

  const std::vector<Edge> e{{1, 2}};
  const auto single = BranchingNetwork::build(2, e);
  const auto pos = classify_initial(single, std::vector<double>{1, 1});
  const auto t2 = tilde_field(CoefficientField::constant(2, 1, 1), single, pos);
  CHECK(t2.eval_gamma(2, std::vector<double>{0.4, 0.9}) == doctest::Approx(0.4));
  CHECK(t2.eval_gamma(1, std::vector<double>{0.4, 0.9}) == doctest::Approx(1.0));
}

TEST_CASE("perturbation size examples") {
  const auto net = two_catalyst();
  const auto cls = classify_initial(net, std::vector<double>{0, 1, 0});
  const auto fr = freeze(CoefficientField::constant(3, 1, 1), net, cls);
  std::vector<std::vector<double>> samples;
  for (double v = 0.9; v <= 1.1001; v += 0.05) samples.push_back({0.1, v, 0.2});

  CHECK(perturbation_size(frozen_field(fr), fr, samples) == 0.0);

  auto off = frozen_field(fr);
  off.gamma[0] = Expr::constant(fr.gamma0[0] + 0.01);
  CHECK(perturbation_size(off, fr, samples) == doctest::Approx(0.01));

  auto lin = frozen_field(fr);
  lin.gamma[1] = Expr::coordinate(3, 2);
  CHECK(perturbation_size(lin, fr, samples) == doctest::Approx(0.1));
}

TEST_CASE("localized perturbation equals the frozen value away from x0") {
  const auto net = two_catalyst();
  const std::vector<double> x0{0, 1, 0};
  const auto cls = classify_initial(net, x0);
  const auto fr = freeze(CoefficientField::constant(3, 1, 1), net, cls);
  const std::vector<double> db{0.01, 0.01, 0.01}, dg{0.005, 0.005, 0.005};
  const auto p = localized_perturbation(fr, x0, db, dg, 0.5);
  CHECK(p.eval_b(1, x0) == doctest::Approx(1.01));
  CHECK(p.eval_gamma(2, x0) == doctest::Approx(1.005));
  const std::vector<double> far{2, 3, 2};
  CHECK(p.eval_b(1, far) == doctest::Approx(1.0));
  CHECK(p.eval_gamma(3, far) == doctest::Approx(1.0));
}

TEST_CASE("property: freeze satisfies the frozen conditions or raises") {
  const auto net = two_catalyst();
  Philox4x32 g(9, 0);
  int ok = 0;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> x0(3);
    for (double& v : x0) v = g.uniform() < 0.4 ? 0.0 : 2 * g.uniform();
    const auto cls = classify_initial(net, x0);
    if (!cls.in_S) continue;
    auto f = CoefficientField::constant(3, 1, 1);
    for (int j = 0; j < 3; ++j) {
      f.b[j] = Expr::constant(4 * g.uniform() - 1);
      f.gamma[j] = Expr::constant(0.1 + g.uniform());
    }
    try {
      const auto fr = freeze(f, net, cls);
      CHECK_NOTHROW(check_frozen(fr, net, cls));
      CHECK(m0(fr, net, cls) > 0.0);
      ++ok;
    } catch (const FrozenDegenerate&) {
    }
  }
  CHECK(ok > 50);
}
