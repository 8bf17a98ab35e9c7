#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "catnet/coefficients.hpp"
#include "catnet/network.hpp"
#include "catnet/rng.hpp"

namespace catnet {

struct SDESystem {
  BranchingNetwork net;
  CoefficientField field;
};

struct DriftDiffusion {
  std::vector<double> drift;
  std::vector<double> diffusion_sq;
};

/// Coefficients of the catalytic system at x >= 0:
/// drift_j = b_j(x); diffusion_sq_j = 2 gamma_j(x) (sum_{C_j} x) x_j for reactants,
/// 2 gamma_j(x) x_j otherwise.
DriftDiffusion drift_diffusion(const BranchingNetwork& net, const CoefficientField& field,
                               std::span<const double> x);

/// Coefficients in the localised reference form used by the perturbed
/// generator: 2 gamma_j(x) sum_{C_j} x on N_R and 2 gamma_i(x) x_i^+ on N_C2.
DriftDiffusion drift_diffusion_reference(const BranchingNetwork& net,
                                         const InitialClassification& cls,
                                         const CoefficientField& field, std::span<const double> x);

struct SimConfig {
  double dt = 1e-3;
  double T = 1.0;
  std::size_t n_paths = 1000;
  std::uint64_t seed = 1;
  /// Steps between stored knots; 0 stores only t = 0 and t = T.
  int record_every = 0;
  /// Paths abort with BlowUp once a coordinate exceeds factor * (1 + |x0|).
  double blowup_factor = 1e6;

  int n_steps() const;
  void validate() const;
};

/// Paths stored flat as knots[(path * n_times + k) * d + coord].
struct PathEnsemble {
  int d = 0;
  std::size_t n_paths = 0;
  std::vector<double> times;
  std::vector<double> knots;
  /// Vertices whose catalyst occupation integral is recorded, and the
  /// integrals I_T stored as integrals[path * |vertices| + k].
  VertexSet integral_vertices;
  std::vector<double> integrals;
  /// Per path: min over all steps of prod_{j in R}(sum_{C_j} x + x_j).
  std::vector<double> min_S_product;
  /// Per path: min over all steps and coordinates.
  std::vector<double> min_knot;

  std::size_t n_times() const { return times.size(); }
  std::span<const double> knot(std::size_t path, std::size_t k) const {
    return {knots.data() + (path * n_times() + k) * d, static_cast<std::size_t>(d)};
  }
  std::span<const double> final_state(std::size_t path) const { return knot(path, n_times() - 1); }
  double integral(std::size_t path, std::size_t k) const {
    return integrals[path * integral_vertices.size() + k];
  }

  nlohmann::json summary() const;
};

/// Full-truncation Euler for the catalytic system. Requires x0 in S.
PathEnsemble simulate(const SDESystem& sys, std::span<const double> x0, const SimConfig& cfg);

/// Reference diffusion with frozen coefficients. N_C2 coordinates are
/// chained exact Feller transitions; N_R coordinates take Gaussian steps with
/// drift b0_j dt and variance 2 gamma0_j dt times the trapezoid average of the
/// catalyst mass over the step. N_R coordinates may go negative.
PathEnsemble simulate_A0(const BranchingNetwork& net, const InitialClassification& cls,
                         const FrozenCoefficients& frozen, std::span<const double> x0,
                         const SimConfig& cfg);

/// simulate_A0 together with a half-resolution run on the same catalyst
/// skeleton (every other knot) whose Gaussian steps are coupled to the fine
/// ones. The first member equals simulate_A0 with the same arguments.
/// Requires an even number of steps.
std::pair<PathEnsemble, PathEnsemble> simulate_A0_paired(const BranchingNetwork& net,
                                                         const InitialClassification& cls,
                                                         const FrozenCoefficients& frozen,
                                                         std::span<const double> x0,
                                                         const SimConfig& cfg);

/// prod_{j in R}(sum_{C_j} x + x_j).
double s_product(const BranchingNetwork& net, std::span<const double> x);

struct MonitorReport {
  double threshold = 1e-12;
  std::size_t n_paths = 0;
  std::size_t below_threshold = 0;
  std::size_t exact_zero = 0;
  std::size_t negative_knots = 0;
  double fraction_below = 0.0;
  double smallest = 0.0;

  nlohmann::json to_json() const;
};

MonitorReport s_product_monitor(const PathEnsemble& ens, const BranchingNetwork& net,
                               double threshold = 1e-12);

/// One full-truncation Euler step of the perturbed reference generator
/// (sign-free N_R coordinates, truncated N_C2 coordinates). Used by direct
/// simulation oracles.
void reference_euler_step(const BranchingNetwork& net, const InitialClassification& cls,
                          const CoefficientField& field, std::span<double> x, double dt,
                          Philox4x32& rng);

}  // namespace catnet
