#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "catnet/coefficients.hpp"
#include "catnet/network.hpp"
#include "catnet/stats.hpp"
#include "catnet/test_function.hpp"

namespace catnet {

using PointFunction = std::function<double(std::span<const double>)>;

/// All points of the tensor grid, last axis fastest. Throws EmptyGrid for an
/// empty axis.
std::vector<std::vector<double>> tensor_grid(const std::vector<std::vector<double>>& axes);

/// Displacement h used in the seminorm of vertex i (i in N_C2).
struct Displacement {
  int i = 0;
  std::vector<double> h;
};

struct GridSpec {
  double alpha = 0.5;
  std::vector<std::vector<double>> points;
  std::vector<Displacement> displacements;

  /// Throws InvalidArgument unless: 0 < alpha < 1; points lie in S0; every
  /// displacement belongs to a vertex of N_C2, is nonzero, vanishes outside
  /// {i} and Rbar_i (only h_i for N_2), and has h_k >= 0 for k in N_C2.
  void validate(const InitialClassification& cls) const;

  /// Tensor grid of points (one value list per coordinate) and displacements
  /// s e_i, +-s e_j and s (e_i +- e_j) / sqrt 2 for j in Rbar_i, s in scales.
  static GridSpec tensor(const InitialClassification& cls, double alpha,
                         const std::vector<std::vector<double>>& axes,
                         std::span<const double> scales);
};

struct SeminormResult {
  VertexSet index;
  std::vector<double> values;
  double weak = 0.0;

  nlohmann::json to_json() const;
};

/// Grid lower bound of the weighted Hoelder seminorms |f|_{alpha,i}, i in
/// N_C2, and of the weak norm (their max). Throws EmptyGrid if there are no
/// points or no displacements.
SeminormResult weighted_seminorm(const PointFunction& f, const InitialClassification& cls,
                                 const GridSpec& grid);
SeminormResult weighted_seminorm(const Observable& f, const InitialClassification& cls,
                                 const GridSpec& grid);

struct NormMcConfig {
  std::size_t n_paths = 4000;
  std::uint64_t seed = 1;
  int steps_per_node = 8;
};

struct SemigroupNormResult {
  double estimate = 0.0;
  /// Max over the grid of (|mean| -+ 2 stderr) / t^{alpha/2}.
  double band_lo = 0.0;
  double band_hi = 0.0;
  double argmax_t = 0.0;
  std::vector<double> argmax_x;

  nlohmann::json to_json() const;
};

/// Grid estimate of sup_t ||P_t f - f|| / t^{alpha/2} for several functions
/// on shared catalyst paths (one ensemble per distinct N_C2 part of the
/// x grid, nodes at t_grid).
std::vector<SemigroupNormResult> semigroup_norms(
    std::span<const Observable* const> fs, const BranchingNetwork& net,
    const InitialClassification& cls, const FrozenCoefficients& frozen, double alpha,
    std::span<const double> t_grid, const std::vector<std::vector<double>>& x_grid,
    const NormMcConfig& mc);

SemigroupNormResult semigroup_norm(const Observable& f, const BranchingNetwork& net,
                                   const InitialClassification& cls,
                                   const FrozenCoefficients& frozen, double alpha,
                                   std::span<const double> t_grid,
                                   const std::vector<std::vector<double>>& x_grid,
                                   const NormMcConfig& mc);

struct NormGrids {
  GridSpec seminorm;
  std::vector<double> t_grid;
  std::vector<std::vector<double>> x_grid;
  NormMcConfig mc;
};

struct EquivalenceRow {
  std::string name;
  double weak = 0.0;
  SemigroupNormResult semigroup;
  double ratio = 0.0;
};

struct EquivalenceReport {
  std::vector<EquivalenceRow> rows;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double spread = 0.0;
  double spread_bound = 100.0;
  bool pass = false;

  nlohmann::json to_json() const;
};

/// Ratios |f|_alpha / |f|_weak over a family of at least 10 functions.
/// Throws DegenerateFamily if some weak norm is 0.
EquivalenceReport equivalence_check(std::span<const TestFunction> family,
                                    const BranchingNetwork& net, const InitialClassification& cls,
                                    const FrozenCoefficients& frozen, const NormGrids& grids,
                                    double spread_bound = 100.0);

struct ProductRuleRow {
  std::string f, g;
  double lhs = 0.0;
  double weak_f = 0.0, sup_f = 0.0, sup_g = 0.0, semigroup_g = 0.0;
  double c_fit = 0.0;
};

struct ProductRuleReport {
  std::vector<ProductRuleRow> rows;
  double c = 0.0;
  double c_spread = 0.0;
  double spread_bound = 10.0;
  bool pass = false;

  nlohmann::json to_json() const;
};

/// |fg|_alpha <= c |f|_weak ||g|| + ||f|| |g|_alpha: per pair the smallest
/// c >= 0 making it hold; pass iff every pair holds with c = max c_fit and
/// the nonzero c_fit values spread by at most spread_bound.
ProductRuleReport product_rule_check(std::span<const std::pair<TestFunction, TestFunction>> pairs,
                                     const BranchingNetwork& net, const InitialClassification& cls,
                                     const FrozenCoefficients& frozen, const NormGrids& grids,
                                     double spread_bound = 10.0);

}  // namespace catnet
