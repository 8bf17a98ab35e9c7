#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "catnet/coefficients.hpp"
#include "catnet/network.hpp"
#include "catnet/stats.hpp"
#include "catnet/test_function.hpp"

namespace catnet {

/// Time grid for catalyst paths. `times` starts at 0 and is strictly
/// increasing; `nodes` are the indices at which path values are kept.
struct Skeleton {
  std::vector<double> times;
  std::vector<std::size_t> nodes;

  /// n_steps equal steps on [0, T]; keeps only the final time.
  static Skeleton uniform(double T, int n_steps);
  /// Keeps the given node times (increasing, > 0) and splits every interval,
  /// including [0, first], into `substeps` equal steps. Node 0 is t = 0.
  static Skeleton with_nodes(std::span<const double> node_times, int substeps);
  /// Nodes 0 and t_min * ratio^k up to the first one >= t_max.
  static Skeleton geometric(double t_min, double ratio, double t_max, int substeps);

  std::size_t n_nodes() const { return nodes.size(); }
  double node_time(std::size_t k) const { return times[nodes[k]]; }
};

struct CatalystConfig {
  std::size_t n_paths = 1000;
  std::uint64_t seed = 1;
  /// Multiplies gamma0 in the sampler only (negative-control hook).
  double gamma_scale = 1.0;
  /// If > 0, every N_C2 vertex also gets two independent zero-drift Feller
  /// paths started at extra_h. Adding them to the base path gives the
  /// process started at x_i + extra_h (branching property), which is how
  /// finite differences in N_C2 directions keep common random numbers.
  double extra_h = 0.0;
};

/// Exact Feller paths of the N_C2 coordinates under the frozen generator,
/// with their running occupation integrals (trapezoid rule on the skeleton).
/// Path p draws from stream p; coordinate v uses substream 4v (base) and
/// 4v+1, 4v+2 (extras), so changing one start value or adding extras leaves
/// every other draw unchanged.
class CatalystEnsemble {
 public:
  static CatalystEnsemble sample(const BranchingNetwork& net, const InitialClassification& cls,
                                 const FrozenCoefficients& frozen, std::span<const double> x,
                                 const Skeleton& skeleton, const CatalystConfig& cfg);

  std::size_t n_paths() const { return n_paths_; }
  std::size_t n_nodes() const { return node_times_.size(); }
  double node_time(std::size_t k) const { return node_times_[k]; }
  double extra_h() const { return extra_h_; }
  const VertexSet& nc2() const { return nc2_; }
  const VertexSet& nr() const { return nr_; }

  /// Value of the c-th N_C2 coordinate at node k.
  double z(std::size_t p, std::size_t k, std::size_t c) const {
    return z_[(p * n_nodes() + k) * nc2_.size() + c];
  }
  /// int_0^{t_k} of the c-th N_C2 coordinate.
  double occupation(std::size_t p, std::size_t k, std::size_t c) const {
    return occ_[(p * n_nodes() + k) * nc2_.size() + c];
  }
  double extra_z(std::size_t p, std::size_t k, std::size_t c, int e) const {
    return ez_[((p * n_nodes() + k) * nc2_.size() + c) * 2 + e];
  }
  double extra_occupation(std::size_t p, std::size_t k, std::size_t c, int e) const {
    return eocc_[((p * n_nodes() + k) * nc2_.size() + c) * 2 + e];
  }
  /// I_t^{(j)} = sum over C_j of occupations, for the r-th N_R vertex.
  double catalyst_integral(std::size_t p, std::size_t k, std::size_t r) const;

  /// Inputs of the Gaussian convolution G at (path p, node k): N_R means
  /// x_j + b0_j t and variances 2 gamma0_j I_t^{(j)}; N_C2 coordinates held at
  /// their path values. `shift_c` (index into nc2(), or -1) adds the extras
  /// selected by `mask` (bit e for extra e) to that coordinate.
  void g_inputs(std::size_t p, std::size_t k, std::span<const double> x,
                std::span<double> mean, std::span<double> var, int shift_c = -1,
                unsigned mask = 0) const;

  /// Mean over paths of G at node k.
  Estimate expect(const Observable& f, std::size_t k, std::span<const double> x,
                  bool* fallback = nullptr) const;
  /// Per-path G values at node k.
  std::vector<double> g_values(const Observable& f, std::size_t k, std::span<const double> x,
                               int shift_c = -1, unsigned mask = 0, bool* fallback = nullptr) const;

 private:
  int d_ = 0;
  std::size_t n_paths_ = 0;
  double extra_h_ = 0.0;
  std::vector<double> node_times_;
  VertexSet nc2_, nr_;
  std::vector<double> b0_nr_, g0_nr_;
  // For each N_R vertex, indices into nc2_ of its catalysts.
  std::vector<std::vector<std::size_t>> cat_index_;
  // For each nc2 index, the N_R indices it catalyses.
  std::vector<std::vector<std::size_t>> feeds_;
  std::vector<double> z_, occ_, ez_, eocc_;
};

}  // namespace catnet
