#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "catnet/coefficients.hpp"
#include "catnet/errors.hpp"
#include "catnet/norms.hpp"
#include "catnet/test_function.hpp"

using namespace catnet;

namespace {

struct TwoCatalyst {
  BranchingNetwork net = BranchingNetwork::build(3, std::vector<Edge>{{1, 2}, {3, 2}});
  std::vector<double> x0{0, 1, 0};
  InitialClassification cls = classify_initial(net, x0);
  FrozenCoefficients frozen = freeze(CoefficientField::constant(3, 1, 1), net, cls);
};

TestFunction bump3(double amp = 1.0) {
  return TestFunction("bump", amp,
                      {Factor::gaussian_bump(0.5, 0.5), Factor::gaussian_bump(0.5, 1.0),
                       Factor::gaussian_bump(0.5, 0.5)});
}

NormGrids small_grids(const InitialClassification& cls) {
  NormGrids g;
  const std::vector<std::vector<double>> axes{{0, 0.5}, {0.5, 1.5}, {0, 0.5}};
  const std::vector<double> scales{0.1, 0.3};
  g.seminorm = GridSpec::tensor(cls, 0.5, axes, scales);
  g.t_grid = {0.04, 0.16, 0.64};
  g.x_grid = tensor_grid(axes);
  g.mc.n_paths = 500;
  g.mc.seed = 4;
  return g;
}

}  // namespace

TEST_CASE("tensor grid ordering and empty axes") {
  const auto g = tensor_grid({{0, 1}, {5, 6, 7}});
  REQUIRE(g.size() == 6);
  CHECK(g[0] == std::vector<double>{0, 5});
  CHECK(g[1] == std::vector<double>{0, 6});
  CHECK(g[5] == std::vector<double>{1, 7});
  CHECK_THROWS_AS(tensor_grid({{0, 1}, {}}), EmptyGrid);
}

TEST_CASE("weighted seminorm of min(x, 1) on a two-point grid") {
  const auto net = BranchingNetwork::build(1, std::vector<Edge>{});
  const auto cls = classify_initial(net, std::vector<double>{1.0});
  GridSpec grid;
  grid.alpha = 0.5;
  grid.points = {{0.0}, {1.0}};
  grid.displacements = {{1, {0.1}}};
  const PointFunction f = [](std::span<const double> x) { return std::min(x[0], 1.0); };
  const auto r = weighted_seminorm(f, cls, grid);
  CHECK(r.weak == doctest::Approx(0.1 * std::pow(0.1, -0.25)));
  CHECK(r.weak == doctest::Approx(0.1778).epsilon(1e-3));

  const PointFunction c = [](std::span<const double>) { return 3.0; };
  CHECK(weighted_seminorm(c, cls, grid).weak == 0.0);

  GridSpec empty = grid;
  empty.points.clear();
  CHECK_THROWS_AS(weighted_seminorm(f, cls, empty), EmptyGrid);
}

TEST_CASE("property: weighted seminorm is homogeneous and monotone under refinement") {
  TwoCatalyst s;
  const std::vector<double> coarse_scales{0.3}, fine_scales{0.1, 0.3};
  const auto coarse = GridSpec::tensor(s.cls, 0.5, {{0, 1}, {0, 2}, {0, 1}}, coarse_scales);
  const auto fine = GridSpec::tensor(s.cls, 0.5, {{0, 0.5, 1}, {0, 1, 2}, {0, 0.5, 1}}, fine_scales);
  const auto f = bump3();
  const auto a = weighted_seminorm(f, s.cls, coarse);
  const auto b = weighted_seminorm(f, s.cls, fine);
  REQUIRE(a.values.size() == b.values.size());
  for (std::size_t k = 0; k < a.values.size(); ++k) CHECK(b.values[k] >= a.values[k]);
  CHECK(b.weak >= a.weak);

  for (double c : {-2.0, 0.5, 3.0}) {
    const auto sc = weighted_seminorm(f.scaled(c), s.cls, fine);
    for (std::size_t k = 0; k < b.values.size(); ++k)
      CHECK(sc.values[k] == doctest::Approx(std::abs(c) * b.values[k]).epsilon(1e-14));
  }
}

TEST_CASE("displacements outside the support rule are rejected") {
  TwoCatalyst s;
  GridSpec g;
  g.alpha = 0.5;
  g.points = {{0, 1, 0}};
  g.displacements = {{1, {0.1, 0.1, 0.0}}};
  CHECK_NOTHROW(g.validate(s.cls));
  g.displacements = {{1, {0.1, 0.0, 0.1}}};
  CHECK_THROWS_AS(g.validate(s.cls), InvalidArgument);
  g.displacements = {{2, {0.0, 0.1, 0.0}}};
  CHECK_THROWS_AS(g.validate(s.cls), InvalidArgument);
  g.displacements = {{1, {-0.1, 0.0, 0.0}}};
  CHECK_THROWS_AS(g.validate(s.cls), InvalidArgument);
}

TEST_CASE("semigroup norm of a constant is zero and scales linearly") {
  TwoCatalyst s;
  const auto g = small_grids(s.cls);
  const auto one = TestFunction::constant(3, 2.0);
  CHECK(semigroup_norm(one, s.net, s.cls, s.frozen, 0.5, g.t_grid, g.x_grid, g.mc).estimate ==
        doctest::Approx(0.0));
  const auto f = bump3();
  const double base =
      semigroup_norm(f, s.net, s.cls, s.frozen, 0.5, g.t_grid, g.x_grid, g.mc).estimate;
  CHECK(base > 0.0);
  const double tripled =
      semigroup_norm(f.scaled(-3.0), s.net, s.cls, s.frozen, 0.5, g.t_grid, g.x_grid, g.mc)
          .estimate;
  CHECK(tripled == doctest::Approx(3.0 * base).epsilon(1e-12));
}

TEST_CASE("equivalence check on scaled copies and degenerate families") {
  TwoCatalyst s;
  const auto g = small_grids(s.cls);
  std::vector<TestFunction> family;
  for (int k = 1; k <= 10; ++k) family.push_back(bump3(0.25 * k));
  const auto rep = equivalence_check(family, s.net, s.cls, s.frozen, g);
  CHECK(rep.pass);
  CHECK(rep.spread == doctest::Approx(1.0).epsilon(1e-12));

  family.back() = TestFunction::constant(3, 1.0);
  CHECK_THROWS_AS(equivalence_check(family, s.net, s.cls, s.frozen, g), DegenerateFamily);
  family.resize(5);
  CHECK_THROWS_AS(equivalence_check(family, s.net, s.cls, s.frozen, g), InvalidArgument);
}

TEST_CASE("product rule with a constant factor") {
  TwoCatalyst s;
  const auto g = small_grids(s.cls);
  const auto f = bump3();
  const auto one = TestFunction::constant(3, 1.0);
  const std::vector<std::pair<TestFunction, TestFunction>> pairs{{one, f}};
  const auto rep = product_rule_check(pairs, s.net, s.cls, s.frozen, g);
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0].c_fit == 0.0);
  CHECK(rep.rows[0].lhs <= rep.rows[0].semigroup_g * (1 + 1e-12));
}
