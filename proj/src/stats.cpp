#include "catnet/stats.hpp"

#include <algorithm>
#include <cmath>

#include <gsl/gsl_fit.h>
#include <gsl/gsl_statistics_double.h>

#include "catnet/errors.hpp"

namespace catnet {

double Estimate::z_score(const Estimate& a, const Estimate& b) {
  const double diff = std::abs(a.mean - b.mean);
  const double se = std::hypot(a.std_err, b.std_err);
  if (se == 0.0) return diff == 0.0 ? 0.0 : INFINITY;
  return diff / se;
}

double Estimate::z_score(const Estimate& a, double exact) {
  return z_score(a, Estimate{exact, 0.0, 0});
}

void to_json(nlohmann::json& j, const Estimate& e) {
  j = nlohmann::json{{"mean", e.mean}, {"std_err", e.std_err}, {"n", e.n}};
}

Estimate Accumulator::result() const {
  Estimate e;
  e.mean = mean_;
  e.n = n_;
  e.std_err = n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  return e;
}

Estimate estimate(std::span<const double> samples) {
  Accumulator acc;
  for (double v : samples) acc.add(v);
  return acc.result();
}

Estimate paired_difference(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("paired_difference: sizes differ");
  Accumulator acc;
  for (std::size_t i = 0; i < a.size(); ++i) acc.add(a[i] - b[i]);
  return acc.result();
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double sample_skewness(std::span<const double> x) {
  if (x.size() < 3) return 0.0;
  return gsl_stats_skew(x.data(), 1, x.size());
}

double sample_excess_kurtosis(std::span<const double> x) {
  if (x.size() < 4) return 0.0;
  return gsl_stats_kurtosis(x.data(), 1, x.size());
}

double empirical_quantile(std::vector<double> x, double q) {
  if (x.empty()) throw InvalidArgument("empirical_quantile: empty sample");
  std::sort(x.begin(), x.end());
  return gsl_stats_quantile_from_sorted_data(x.data(), 1, x.size(), std::clamp(q, 0.0, 1.0));
}

LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> sigma) {
  if (x.size() != y.size() || (!sigma.empty() && sigma.size() != x.size()))
    throw DimensionMismatch("fit_line: sizes differ");
  if (x.size() < 2) throw InvalidArgument("fit_line: need at least two points");
  double c0, c1, cov00, cov01, cov11, chisq;
  LineFit fit;
  if (sigma.empty()) {
    gsl_fit_linear(x.data(), 1, y.data(), 1, x.size(), &c0, &c1, &cov00, &cov01, &cov11, &chisq);
  } else {
    std::vector<double> w(sigma.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double s = std::max(sigma[i], 1e-300);
      w[i] = 1.0 / (s * s);
    }
    gsl_fit_wlinear(x.data(), 1, w.data(), 1, y.data(), 1, x.size(), &c0, &c1, &cov00, &cov01,
                    &cov11, &chisq);
  }
  fit.intercept = c0;
  fit.slope = c1;
  fit.slope_se = std::sqrt(std::max(cov11, 0.0));
  return fit;
}

double binomial_se(double p, std::size_t n) {
  if (n == 0) return INFINITY;
  return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n));
}

}  // namespace catnet
