#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <json.hpp>

#include "catnet/a0_paths.hpp"
#include "catnet/coefficients.hpp"
#include "catnet/network.hpp"
#include "catnet/norms.hpp"
#include "catnet/stats.hpp"
#include "catnet/test_function.hpp"

namespace catnet {

struct ResolventConfig {
  double t_min = 1e-3;
  double ratio = 1.25;
  /// T_max = t_max_factor / lambda.
  double t_max_factor = 16.0;
  int substeps = 4;
  std::size_t n_paths = 4000;
  /// Finite-difference steps: central in N_R coordinates, additive coupling
  /// in N_C2 coordinates.
  double fd_step_nr = 1e-3;
  double fd_step_nc2 = 0.05;

  void validate() const;
};

struct ResolventEstimate {
  Estimate value;
  double quad_error = 0.0;
  double tail = 0.0;
  /// quad_error + std_err + tail.
  double budget = 0.0;

  nlohmann::json to_json() const;
};

/// Catalyst paths from one start point on a geometric time grid, reusable
/// for every lambda >= lambda_min, every observable and every N_R start
/// value (N_R coordinates only shift Gaussian means).
class ResolventPaths {
 public:
  ResolventPaths(const BranchingNetwork& net, const InitialClassification& cls,
                 const FrozenCoefficients& frozen, std::span<const double> x, double lambda_min,
                 const ResolventConfig& cfg, std::uint64_t seed, bool with_extras);

  const CatalystEnsemble& ensemble() const { return ens_; }
  const std::vector<double>& x() const { return x_; }

  /// R_lambda g(x') where x' equals x except possibly in N_R coordinates.
  ResolventEstimate r_lambda(const Observable& g, double lambda,
                             std::span<const double> x_eval = {}) const;
  /// B R_lambda g(x') with common-random-number finite differences.
  ResolventEstimate b_r_lambda(const Observable& g, const CoefficientField& tilde, double lambda,
                               std::span<const double> x_eval = {}) const;
  /// Per-path per-node values of B P_t g(x'), lambda-free.
  std::vector<double> b_node_values(const Observable& g, const CoefficientField& tilde,
                                    std::span<const double> x_eval = {}) const;

  /// Per-path per-node values q[p * n_nodes + k] weighted into a resolvent.
  ResolventEstimate weigh(std::span<const double> q, double lambda, double sup_bound) const;

 private:
  std::vector<double> eval_point(std::span<const double> x_eval) const;

  const BranchingNetwork* net_;
  const InitialClassification* cls_;
  const FrozenCoefficients* frozen_;
  ResolventConfig cfg_;
  std::vector<double> x_;
  CatalystEnsemble ens_;
};

/// R_lambda f(x) = int_0^inf e^{-lambda t} P_t f(x) dt on a geometric grid
/// with log-trapezoid weights, P_t f ~ f(x) below t_min, and the tail bound
/// ||f|| e^{-lambda T_max} / lambda.
ResolventEstimate r_lambda(const Observable& f, const BranchingNetwork& net,
                           const InitialClassification& cls, const FrozenCoefficients& frozen,
                           std::span<const double> x, double lambda, const ResolventConfig& cfg,
                           std::uint64_t seed);

/// B g(x) for a deterministic g: central differences in N_R coordinates and
/// in N_C2 coordinates away from 0, one-sided three-point stencils below the
/// step. Throws StencilOutOfDomain if x is outside S0.
double apply_B(const CoefficientField& tilde, const FrozenCoefficients& frozen,
               const BranchingNetwork& net, const InitialClassification& cls,
               const PointFunction& g, std::span<const double> x, double fd_step = 1e-4);

struct KeyEstimateRow {
  double lambda = 0.0;
  double ratio = 0.0;
  double budget = 0.0;
  std::vector<double> argmax_x;
};

struct KeyEstimateReport {
  std::string function;
  double f_norm = 0.0;
  double epsilon = 0.0;
  std::vector<KeyEstimateRow> rows;
  bool nonincreasing = false;
  /// Smallest lambda in the list with ratio <= 1/2 (0 if none).
  double lambda1 = 0.0;
  bool pass = false;

  nlohmann::json to_json() const;
};

/// sup over x_grid of |B R_lambda f| / ||f|| for each lambda. Throws
/// PreconditionViolated if the perturbation size on x_grid exceeds eps_max.
std::vector<KeyEstimateReport> key_estimate_probe(
    std::span<const TestFunction> fs, const CoefficientField& tilde, const BranchingNetwork& net,
    const InitialClassification& cls, const FrozenCoefficients& frozen,
    const std::vector<std::vector<double>>& x_grid, std::span<const double> lambdas,
    const ResolventConfig& cfg, std::uint64_t seed, double eps_max = 0.05);

struct SeriesConfig {
  /// Axis values of the evaluation grid (one list per coordinate).
  std::vector<std::vector<double>> axes;
  ResolventConfig resolvent;
  /// Paths for R_lambda g_n at the probe point.
  std::size_t probe_paths = 20000;
  double rbf_shape = 1.0;
};

struct SeriesResult {
  double lambda = 0.0;
  /// Grid sup of g_n, n = 0..n_terms+1.
  std::vector<double> g_norms;
  /// ||g_{n+1}|| / ||g_n||.
  std::vector<double> ratios;
  /// R_lambda g_n at the probe, n = 0..n_terms-1.
  std::vector<ResolventEstimate> terms;
  std::vector<double> partial_sums;
  double partial_sum_std_err = 0.0;
  double partial_sum_budget = 0.0;
  /// Bound on the omitted terms from the last recorded ratio.
  double remainder_bound = 0.0;

  nlohmann::json to_json() const;
};

/// g_0 = f, g_{n+1} = B R_lambda g_n on the tensor grid (Gaussian RBF
/// interpolants between grid points), partial sums of R_lambda g_n at the
/// probe. Throws Divergence if two consecutive ratios exceed 1.
SeriesResult perturbation_series(const TestFunction& f, const CoefficientField& tilde,
                                 const BranchingNetwork& net, const InitialClassification& cls,
                                 const FrozenCoefficients& frozen, std::span<const double> x_probe,
                                 double lambda, int n_terms, const SeriesConfig& cfg,
                                 std::uint64_t seed);

struct DirectOracleConfig {
  double dt = 2e-3;
  /// Horizon = horizon_factor / lambda.
  double horizon_factor = 12.0;
  std::size_t n_paths = 10000;
};

struct DirectOracleResult {
  Estimate fine;
  /// Paired difference fine - coarse (coarse uses 2 dt and the summed noise).
  Estimate fine_minus_coarse;
  double tail = 0.0;
  /// |fine - coarse| + 2 stderr of the difference + tail.
  double discretization_allowance = 0.0;

  nlohmann::json to_json() const;
};

/// E int_0^H e^{-lambda t} f(X_t) dt for the perturbed reference generator
/// (sign-free N_R coordinates, truncated N_C2 coordinates) by Euler paths.
DirectOracleResult direct_resolvent_oracle(const Observable& f, const CoefficientField& tilde,
                                           const BranchingNetwork& net,
                                           const InitialClassification& cls,
                                           std::span<const double> x, double lambda,
                                           const DirectOracleConfig& cfg, std::uint64_t seed);

struct IdentityReport {
  double lambda = 0.0, mu = 0.0;
  ResolventEstimate r_lambda, r_mu, nested;
  double lhs = 0.0, rhs = 0.0;
  double interpolation_error = 0.0;
  double budget = 0.0;
  bool pass = false;

  nlohmann::json to_json() const;
};

/// R_lambda f - R_mu f against (mu - lambda) R_lambda(R_mu f); the inner
/// resolvent is computed on the tensor grid `axes` and interpolated.
IdentityReport resolvent_identity_check(const TestFunction& f, const BranchingNetwork& net,
                                        const InitialClassification& cls,
                                        const FrozenCoefficients& frozen,
                                        std::span<const double> x, double lambda, double mu,
                                        const std::vector<std::vector<double>>& axes,
                                        const ResolventConfig& cfg, std::uint64_t seed);

}  // namespace catnet
