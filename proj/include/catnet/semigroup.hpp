#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "catnet/a0_paths.hpp"
#include "catnet/coefficients.hpp"
#include "catnet/network.hpp"
#include "catnet/stats.hpp"
#include "catnet/test_function.hpp"

namespace catnet {

/// Gaussian convolution G_{t,x}(y, z): E f(U, z) with U_j ~ N(x_j + b0_j t,
/// 2 gamma0_j y_j) for j in N_R. x_NR and y_NR follow the order of cls.N_R,
/// z_NC2 the order of cls.NC2(). y_j = 0 is a point mass.
double eval_G(const FrozenCoefficients& frozen, const InitialClassification& cls, double t,
              std::span<const double> x_NR, std::span<const double> y_NR,
              std::span<const double> z_NC2, const Observable& f, bool* fallback = nullptr);

struct PtConfig {
  std::size_t n_paths = 10000;
  std::uint64_t seed = 1;
  int n_steps = 256;
};

/// Monte Carlo value of P_t f(x) for the frozen generator: exact N_C2 Feller
/// paths, trapezoid occupation integrals, closed-form inner Gaussian integral.
Estimate pt_f(const BranchingNetwork& net, const InitialClassification& cls,
              const FrozenCoefficients& frozen, std::span<const double> x, double t,
              const Observable& f, const PtConfig& cfg, bool* fallback = nullptr);

struct MomentOracles {
  double mean_sum = 0.0;
  double second_moment_sum = 0.0;
  double second_moment_increment = 0.0;
  double mean_integral = 0.0;
};
void to_json(nlohmann::json& j, const MomentOracles& m);

/// Closed forms for the catalyst mass of j under independent frozen Feller
/// diffusions. Throws NotInNR if j is not in N_R.
MomentOracles moment_oracles(const BranchingNetwork& net, const InitialClassification& cls,
                             const FrozenCoefficients& frozen, std::span<const double> x, double t,
                             int j);

struct MomentCheck {
  int j = 0;
  std::string identity;
  Estimate estimate;
  double oracle = 0.0;
  double z = 0.0;
};

struct MomentReport {
  double t = 0.0;
  std::size_t n_paths = 0;
  double gamma_scale = 1.0;
  double z_limit = 4.0;
  std::vector<MomentCheck> checks;
  bool pass = true;

  nlohmann::json to_json() const;
};

/// Monte Carlo estimates of the four identities for every j in N_R against
/// moment_oracles. gamma_scale != 1 corrupts gamma0 in the sampler only.
MomentReport verify_moments(const BranchingNetwork& net, const InitialClassification& cls,
                            const FrozenCoefficients& frozen, std::span<const double> x, double t,
                            std::size_t n_paths, std::uint64_t seed, double gamma_scale = 1.0,
                            int n_steps = 256);

struct InverseMomentRow {
  double t = 0.0;
  Estimate estimate;
  double cap = 0.0;
  std::size_t n_capped = 0;
  double bound_shape = 0.0;
  double fitted_constant = 0.0;
};

struct InverseMomentReport {
  int j = 0;
  double p = 1.0;
  std::vector<double> x;
  std::vector<InverseMomentRow> rows;
  LineFit loglog;
  double constant_spread = 0.0;

  nlohmann::json to_json() const;
};

/// E[(I_t^{(j)})^{-p}] over a t grid, winsorized at the 1 - 1e-6 empirical
/// quantile; bound_shape = t^{-p} min_{i in C_j} (t + x_i)^{-p}. Throws
/// PreconditionViolated if some b0_i = 0 for i in C_j.
InverseMomentReport inverse_moment_probe(const BranchingNetwork& net,
                                         const InitialClassification& cls,
                                         const FrozenCoefficients& frozen,
                                         std::span<const double> x, std::span<const double> t_grid,
                                         int j, double p, std::size_t n_paths, std::uint64_t seed,
                                         int n_steps = 256);

struct DerivativeRow {
  int vertex = 0;
  double t = 0.0;
  double step = 0.0;
  Estimate first;
  /// Second difference times the diffusion weight (sum_{C_j} x for N_R,
  /// x_i for N_C2).
  Estimate scaled_second;
};

struct DerivativeSlope {
  int vertex = 0;
  LineFit first_loglog;
  std::size_t n_fit = 0;
  double expected_first_slope = 0.0;
  /// sup over the grid of t * |scaled second derivative|.
  double sup_t_scaled_second = 0.0;
};

struct DerivativeReport {
  std::vector<DerivativeRow> rows;
  std::vector<DerivativeSlope> slopes;

  nlohmann::json to_json() const;
};

/// Finite differences of P_t f in every coordinate with common random
/// numbers: N_R coordinates by central differences of the start point on the
/// same paths; N_C2 coordinates by adding independent zero-drift Feller
/// paths started at the step size (one-sided stencil). Step per coordinate
/// is max(fd_step, fd_step * x_i).
DerivativeReport derivative_scaling_probe(const BranchingNetwork& net,
                                          const InitialClassification& cls,
                                          const FrozenCoefficients& frozen, const Observable& f,
                                          std::span<const double> x,
                                          std::span<const double> t_grid, double fd_step,
                                          std::size_t n_paths, std::uint64_t seed,
                                          int steps_per_node = 64);

}  // namespace catnet
