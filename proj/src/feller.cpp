#include "catnet/feller.hpp"

#include <algorithm>
#include <cmath>

#include "catnet/errors.hpp"

namespace catnet {

void FellerParams::validate() const {
  if (!(x >= 0.0)) throw InvalidArgument("feller: x must be nonnegative");
  if (!(b >= 0.0)) throw InvalidArgument("feller: b must be nonnegative");
  if (!(gamma > 0.0)) throw InvalidArgument("feller: gamma must be positive");
}

double exact_transition_sample(const FellerParams& p, double t, Philox4x32& rng) {
  if (!(t > 0.0)) throw InvalidArgument("feller: t must be positive");
  const double scale = p.gamma * t;
  const std::int64_t n = rng.poisson(p.x / scale);
  const double shape = p.b / p.gamma + static_cast<double>(n);
  return scale * rng.gamma(shape);
}

double euler_transition_sample(const FellerParams& p, double t, double dt, Philox4x32& rng) {
  if (!(t > 0.0) || !(dt > 0.0)) throw InvalidArgument("feller: t and dt must be positive");
  const int steps = std::max(1, static_cast<int>(std::lround(t / dt)));
  const double h = t / steps;
  const double sh = std::sqrt(h);
  double x = p.x;
  for (int k = 0; k < steps; ++k)
    x = std::max(0.0, x + p.b * h + std::sqrt(2.0 * p.gamma * x) * sh * rng.normal());
  return x;
}

double survival_probability(double h, double gamma, double t) {
  if (!(h >= 0.0) || !(gamma > 0.0) || !(t > 0.0))
    throw InvalidArgument("survival_probability: need h >= 0, gamma > 0, t > 0");
  return -std::expm1(-h / (t * gamma));
}

ClusterDecomposition cluster_sample(double x, double gamma, double t, Philox4x32& rng) {
  FellerParams{x, 0.0, gamma}.validate();
  if (!(t > 0.0)) throw InvalidArgument("cluster_sample: t must be positive");
  ClusterDecomposition c;
  const double mean_level = gamma * t;
  c.N = rng.poisson(x / mean_level);
  c.levels.reserve(static_cast<std::size_t>(c.N));
  for (std::int64_t k = 0; k < c.N; ++k) {
    c.levels.push_back(mean_level * rng.exponential());
    c.total += c.levels.back();
  }
  return c;
}

FellerPath path_sample(const FellerParams& p, double T, int n_steps, Philox4x32& rng) {
  p.validate();
  if (n_steps < 1) throw InvalidArgument("path_sample: n_steps must be at least 1");
  if (!(T > 0.0)) throw InvalidArgument("path_sample: T must be positive");
  FellerPath path;
  path.times.resize(n_steps + 1);
  path.values.resize(n_steps + 1);
  const double dt = T / n_steps;
  path.times[0] = 0.0;
  path.values[0] = p.x;
  FellerParams step = p;
  for (int k = 1; k <= n_steps; ++k) {
    path.times[k] = (k == n_steps) ? T : k * dt;
    step.x = path.values[k - 1];
    path.values[k] = exact_transition_sample(step, dt, rng);
    path.integral += 0.5 * dt * (path.values[k - 1] + path.values[k]);
  }
  return path;
}

nlohmann::json to_json(const FellerParams& p) {
  return nlohmann::json{{"x", p.x}, {"b", p.b}, {"gamma", p.gamma}};
}

}  // namespace catnet
