#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>

namespace catnet {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A generator is addressed by (seed, stream, substream). Monte Carlo code
/// uses the path index as `stream`, so every path can be regenerated from
/// its index alone and ensembles do not depend on how paths are scheduled
/// across workers. Satisfies UniformRandomBitGenerator, so the standard
/// <random> distributions can be driven by it.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;

  Philox4x32(std::uint64_t seed, std::uint64_t stream, std::uint32_t substream = 0);

  /// One keyed bijection of the counter block (ten rounds).
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                            std::array<std::uint32_t, 2> key);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  /// Standard normal via Box-Muller; the second variate is cached.
  double normal();
  /// Exponential with unit mean.
  double exponential();
  /// Poisson with the given mean (mean >= 0).
  std::int64_t poisson(double mean);
  /// Gamma(shape, 1); returns 0 for shape == 0.
  double gamma(double shape);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> ctr_{};
  std::array<std::uint32_t, 4> out_{};
  unsigned pos_ = 4;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

/// splitmix64 finaliser; used to derive independent seeds from a master seed
/// and a tag (check id, grid point hash, ...).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);
std::uint64_t hash_doubles(const double* data, std::size_t n, std::uint64_t h = 0x9E3779B97F4A7C15ull);

// Worker pool configuration. Results never depend on the worker count: each
// path draws from its own stream and reductions run in index order.
void set_worker_count(unsigned n);
unsigned worker_count();

/// Runs fn(i) for i in [0, n) on worker_count() threads. The first exception
/// thrown by any task is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace catnet
