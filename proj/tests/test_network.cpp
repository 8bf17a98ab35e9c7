#include <doctest.h>

#include <algorithm>
#include <vector>

#include "catnet/errors.hpp"
#include "catnet/network.hpp"
#include "catnet/rng.hpp"

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

TEST_CASE("catalyst and reactant sets") {
  const auto net = two_catalyst();
  CHECK(net.catalyst_set() == VertexSet{1, 3});
  CHECK(net.reactant_set() == VertexSet{2});
  CHECK(net.catalysts_of(2) == VertexSet{1, 3});
  CHECK(net.catalysts_of(1).empty());
  CHECK(net.reactants_of(1) == VertexSet{2});
  const double x[3] = {0.5, 7.0, 2.0};
  CHECK(net.catalyst_mass(2, x) == doctest::Approx(2.5));

  const auto h = hypercycle(4);
  CHECK(h.catalyst_set() == VertexSet{1, 2, 3, 4});
  CHECK(h.reactant_set() == VertexSet{1, 2, 3, 4});
  for (int j = 1; j <= 4; ++j) CHECK(h.catalysts_of(j).size() == 1);
  CHECK(h.catalysts_of(1) == VertexSet{4});
}

TEST_CASE("malformed networks are rejected") {
  const std::vector<Edge> loop{{1, 1}};
  CHECK_THROWS_AS(BranchingNetwork::build(2, loop), SelfLoop);
  const std::vector<Edge> out{{1, 3}};
  CHECK_THROWS_AS(BranchingNetwork::build(2, out), OutOfRange);
  const std::vector<Edge> none;
  CHECK_THROWS(BranchingNetwork::build(0, none));
}

TEST_CASE("state space membership") {
  const auto net = two_catalyst();
  CHECK(in_state_space(net, std::vector<double>{0, 1, 0}));
  CHECK_FALSE(in_state_space(net, std::vector<double>{0, 0, 0}));
  const std::vector<Edge> none;
  const auto free = BranchingNetwork::build(2, none);
  CHECK(in_state_space(free, std::vector<double>{0, 0}));
}

TEST_CASE("initial classification examples") {
  const auto net = two_catalyst();
  const auto a = classify_initial(net, std::vector<double>{0, 1, 0});
  CHECK(a.N_R == VertexSet{2});
  CHECK(a.N_C == VertexSet{1, 3});
  CHECK(a.N_2.empty());
  CHECK(a.Z == VertexSet{1, 3});
  CHECK(a.rbar(1) == VertexSet{2});
  CHECK(a.rbar(3) == VertexSet{2});
  CHECK(a.in_S);

  const auto b = classify_initial(net, std::vector<double>{0, 1, 1});
  CHECK(b.N_R.empty());
  CHECK(b.N_C.empty());
  CHECK(b.N_2 == VertexSet{1, 2, 3});
  CHECK(b.Z == VertexSet{1});

  const auto c = classify_initial(hypercycle(4), std::vector<double>{1, 2, 3, 4});
  CHECK(c.N_R.empty());
  CHECK(c.N_C.empty());
  CHECK(c.N_2 == VertexSet{1, 2, 3, 4});
  CHECK(c.Z.empty());

  CHECK_FALSE(classify_initial(net, std::vector<double>{0, 0, 0}).in_S);
}

TEST_CASE("S0 membership") {
  const auto cls = classify_initial(two_catalyst(), std::vector<double>{0, 1, 0});
  CHECK(in_S0(cls, std::vector<double>{0, -0.5, 0}));
  CHECK_FALSE(in_S0(cls, std::vector<double>{-0.1, 0, 0}));
  const auto pos = classify_initial(two_catalyst(), std::vector<double>{1, 1, 1});
  CHECK_FALSE(in_S0(pos, std::vector<double>{1, -1e-9, 1}));
}

TEST_CASE("property: classification partitions V for random networks and points") {
  Philox4x32 g(42, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const int d = 2 + static_cast<int>(g() % 5);
    std::vector<Edge> edges;
    for (int i = 1; i <= d; ++i)
      for (int j = 1; j <= d; ++j)
        if (i != j && g.uniform() < 0.3) edges.push_back({i, j});
    const auto net = BranchingNetwork::build(d, edges);
    std::vector<double> x0(d);
    for (double& v : x0) v = g.uniform() < 0.5 ? 0.0 : g.uniform();
    const auto cls = classify_initial(net, x0);
    std::vector<int> count(d + 1, 0);
    for (const auto* s : {&cls.N_R, &cls.N_C, &cls.N_2})
      for (int v : *s) count.at(v)++;
    for (int v = 1; v <= d; ++v) REQUIRE(count[v] == 1);
    for (int v = 1; v <= d; ++v) {
      for (int i : cls.rbar(v)) {
        CHECK(std::find(cls.N_R.begin(), cls.N_R.end(), i) != cls.N_R.end());
        CHECK(std::find(net.reactants_of(v).begin(), net.reactants_of(v).end(), i) !=
              net.reactants_of(v).end());
      }
    }
    CHECK(cls.in_S == in_state_space(net, x0));
    if (cls.in_S) CHECK(in_S0(cls, x0));
  }
}
