#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

namespace catnet {

/// Sample mean with its standard error.
struct Estimate {
  double mean = 0.0;
  double std_err = 0.0;
  std::size_t n = 0;

  /// |a - b| / sqrt(se_a^2 + se_b^2); 0 when both are exact and equal.
  static double z_score(const Estimate& a, const Estimate& b);
  static double z_score(const Estimate& a, double exact);
};

void to_json(nlohmann::json& j, const Estimate& e);

Estimate estimate(std::span<const double> samples);
/// Mean of a[i] - b[i] with the paired standard error.
Estimate paired_difference(std::span<const double> a, std::span<const double> b);

/// Two-sample Kolmogorov-Smirnov statistic sup_x |F_a(x) - F_b(x)|.
/// Handles ties (atoms) correctly.
double ks_statistic(std::vector<double> a, std::vector<double> b);

double sample_skewness(std::span<const double> x);
/// Excess kurtosis (0 for the normal law).
double sample_excess_kurtosis(std::span<const double> x);

/// Quantile of the empirical distribution (linear interpolation).
double empirical_quantile(std::vector<double> x, double q);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};
/// Weighted least squares fit y = intercept + slope * x with weights 1/sigma^2.
/// Pass empty sigma for an unweighted fit.
LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> sigma = {});

/// Standard error of a binomial frequency with success probability p.
double binomial_se(double p, std::size_t n);

/// Accumulates sums in a fixed order; merging two accumulators built over
/// disjoint index ranges is not supported on purpose (reproducibility).
class Accumulator {
 public:
  void add(double v) {
    ++n_;
    const double delta = v - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (v - mean_);
  }
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  Estimate result() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace catnet
