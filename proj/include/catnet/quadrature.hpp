#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace catnet {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Hermite rule for the weight exp(-x^2) on the real line.
const QuadratureRule& gauss_hermite(std::size_t order);
/// Gauss-Legendre rule on [-1, 1].
const QuadratureRule& gauss_legendre(std::size_t order);

/// E[g(m + s Z)], Z standard normal, by Gauss-Hermite of the given order.
double normal_expectation_gh(const std::function<double(double)>& g, double m, double s,
                             std::size_t order = 64);
/// E[g(m + s Z) 1{lo <= m + s Z <= hi}] by Gauss-Legendre on [lo, hi].
double normal_expectation_gl(const std::function<double(double)>& g, double m, double s,
                             double lo, double hi, std::size_t order = 64);

/// Standard normal density and distribution function.
double normal_pdf(double z);
double normal_cdf(double z);

}  // namespace catnet
