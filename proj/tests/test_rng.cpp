#include <doctest.h>

#include <atomic>
#include <cmath>
#include <set>
#include <vector>

#include "catnet/rng.hpp"
#include "catnet/stats.hpp"

using namespace catnet;

TEST_CASE("philox4x32-10 known-answer vectors") {
  using A4 = std::array<std::uint32_t, 4>;
  using A2 = std::array<std::uint32_t, 2>;
  CHECK(Philox4x32::block(A4{0, 0, 0, 0}, A2{0, 0}) ==
        A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox4x32::block(A4{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                          A2{0xffffffffu, 0xffffffffu}) ==
        A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox4x32::block(A4{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                          A2{0xa4093822u, 0x299f31d0u}) ==
        A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
  Philox4x32 a(7, 3), b(7, 3), c(7, 4), d(7, 3, 1);
  std::vector<std::uint32_t> va, vb, vc, vd;
  for (int i = 0; i < 16; ++i) {
    va.push_back(a());
    vb.push_back(b());
    vc.push_back(c());
    vd.push_back(d());
  }
  CHECK(va == vb);
  CHECK(va != vc);
  CHECK(va != vd);
}

TEST_CASE("uniform lies in the open unit interval with mean one half") {
  Philox4x32 g(1, 0);
  Accumulator acc;
  for (int i = 0; i < 200000; ++i) {
    const double u = g.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    acc.add(u);
  }
  CHECK(std::abs(acc.mean() - 0.5) < 4 * std::sqrt(1.0 / 12.0 / 200000));
}

TEST_CASE("normal, exponential, poisson and gamma moments") {
  Philox4x32 g(11, 0);
  const int n = 200000;
  Accumulator nz, ex, po, ga;
  for (int i = 0; i < n; ++i) {
    nz.add(g.normal());
    ex.add(g.exponential());
    po.add(static_cast<double>(g.poisson(3.5)));
    ga.add(g.gamma(2.5));
  }
  CHECK(std::abs(nz.mean()) < 4 * std::sqrt(1.0 / n));
  CHECK(std::abs(nz.variance() - 1.0) < 0.02);
  CHECK(std::abs(ex.mean() - 1.0) < 4 * std::sqrt(1.0 / n));
  CHECK(std::abs(po.mean() - 3.5) < 4 * std::sqrt(3.5 / n));
  CHECK(std::abs(po.variance() - 3.5) < 0.1);
  CHECK(std::abs(ga.mean() - 2.5) < 4 * std::sqrt(2.5 / n));
  CHECK(g.gamma(0.0) == 0.0);
  CHECK(g.poisson(0.0) == 0);
}

TEST_CASE("mix_seed separates tags") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 50; ++a)
    for (std::uint64_t b = 0; b < 50; ++b) seen.insert(mix_seed(a, b));
  CHECK(seen.size() == 2500);
  const double x[3] = {1.0, 2.0, 3.0}, y[3] = {1.0, 2.0, 3.0000000001};
  CHECK(hash_doubles(x, 3) != hash_doubles(y, 3));
  CHECK(hash_doubles(x, 3) == hash_doubles(x, 3));
}

TEST_CASE("parallel_for covers every index once and results do not depend on workers") {
  auto run = [](unsigned workers) {
    set_worker_count(workers);
    std::vector<double> out(1000);
    parallel_for(out.size(), [&](std::size_t i) {
      Philox4x32 g(5, i);
      out[i] = g.normal();
    });
    return out;
  };
  const auto one = run(1), four = run(4);
  CHECK(one == four);
  set_worker_count(3);
  std::vector<std::atomic<int>> hits(777);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                    if (i == 7) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
  set_worker_count(1);
}
