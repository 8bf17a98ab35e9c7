#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "catnet/rng.hpp"

namespace catnet {

/// Feller branching diffusion with immigration, generator b d/dx + gamma x d2/dx2,
/// i.e. dX = b dt + sqrt(2 gamma X) dW.
struct FellerParams {
  double x = 0.0;
  double b = 0.0;
  double gamma = 1.0;

  /// Throws InvalidArgument unless x >= 0, b >= 0, gamma > 0.
  void validate() const;
};

/// One draw of X_t. X_t = gamma t * Gamma(b/gamma + N) with N ~ Poisson(x / (gamma t)),
/// the scaled noncentral chi-square law with 2b/gamma degrees of freedom.
double exact_transition_sample(const FellerParams& p, double t, Philox4x32& rng);

/// Full-truncation Euler approximation of X_t with step dt; used as an
/// independent oracle for the exact sampler.
double euler_transition_sample(const FellerParams& p, double t, double dt, Philox4x32& rng);

/// P(X_t > 0) for b = 0 started at h: 1 - exp(-h / (t gamma)).
double survival_probability(double h, double gamma, double t);

struct ClusterDecomposition {
  std::int64_t N = 0;
  std::vector<double> levels;
  double total = 0.0;
};

/// Poisson cluster representation of X_t for b = 0: N ~ Poisson(x / (gamma t))
/// surviving clusters, each with an exponential level of mean gamma t.
ClusterDecomposition cluster_sample(double x, double gamma, double t, Philox4x32& rng);

struct FellerPath {
  std::vector<double> times;
  std::vector<double> values;
  double integral = 0.0;  // trapezoid estimate of int_0^T X ds
};

/// Exact skeleton on a uniform grid of n_steps intervals, chained by the
/// Markov property.
FellerPath path_sample(const FellerParams& p, double T, int n_steps, Philox4x32& rng);

nlohmann::json to_json(const FellerParams& p);

}  // namespace catnet
