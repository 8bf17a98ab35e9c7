#include "catnet/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include <gsl/gsl_integration.h>

#include "catnet/errors.hpp"

namespace catnet {

namespace {

QuadratureRule build_rule(const gsl_integration_fixed_type* type, std::size_t order) {
  // Hermite: weight exp(-b (x-a)^2) with a = 0, b = 1. Legendre on [a, b] = [-1, 1].
  const bool hermite = type == gsl_integration_fixed_hermite;
  gsl_integration_fixed_workspace* w =
      gsl_integration_fixed_alloc(type, order, hermite ? 0.0 : -1.0, 1.0, 0.0, 0.0);
  if (w == nullptr) throw InvalidArgument("quadrature: cannot build rule");
  QuadratureRule rule;
  const double* x = gsl_integration_fixed_nodes(w);
  const double* wt = gsl_integration_fixed_weights(w);
  rule.nodes.assign(x, x + order);
  rule.weights.assign(wt, wt + order);
  gsl_integration_fixed_free(w);
  return rule;
}

const QuadratureRule& cached(const gsl_integration_fixed_type* type, std::size_t order) {
  static std::mutex mutex;
  static std::map<std::pair<const void*, std::size_t>, std::unique_ptr<QuadratureRule>> cache;
  if (order == 0) throw InvalidArgument("quadrature: order must be positive");
  std::lock_guard lock(mutex);
  auto& slot = cache[{type, order}];
  if (!slot) slot = std::make_unique<QuadratureRule>(build_rule(type, order));
  return *slot;
}

}  // namespace

const QuadratureRule& gauss_hermite(std::size_t order) {
  return cached(gsl_integration_fixed_hermite, order);
}

const QuadratureRule& gauss_legendre(std::size_t order) {
  return cached(gsl_integration_fixed_legendre, order);
}

double normal_expectation_gh(const std::function<double(double)>& g, double m, double s,
                             std::size_t order) {
  if (s == 0.0) return g(m);
  const auto& rule = gauss_hermite(order);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    acc += rule.weights[i] * g(m + std::numbers::sqrt2 * s * rule.nodes[i]);
  return acc / std::sqrt(std::numbers::pi);
}

double normal_expectation_gl(const std::function<double(double)>& g, double m, double s,
                             double lo, double hi, std::size_t order) {
  if (s == 0.0) return (m >= lo && m <= hi) ? g(m) : 0.0;
  const auto& rule = gauss_legendre(order);
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double u = mid + half * rule.nodes[i];
    acc += rule.weights[i] * g(u) * normal_pdf((u - m) / s) / s;
  }
  return acc * half;
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace catnet
