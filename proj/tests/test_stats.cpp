#include <doctest.h>

#include <cmath>
#include <vector>

#include "catnet/quadrature.hpp"
#include "catnet/rng.hpp"
#include "catnet/stats.hpp"

using namespace catnet;

TEST_CASE("estimate and paired difference") {
  const std::vector<double> a{1, 2, 3, 4}, b{0.5, 1.5, 2.5, 4.5};
  const auto e = estimate(a);
  CHECK(e.mean == doctest::Approx(2.5));
  CHECK(e.std_err == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(e.n == 4);
  const auto d = paired_difference(a, b);
  CHECK(d.mean == doctest::Approx(0.25));
  CHECK(Estimate::z_score(Estimate{1.0, 0.0, 1}, 1.0) == 0.0);
  CHECK(Estimate::z_score(Estimate{1.0, 0.3, 10}, Estimate{1.6, 0.4, 10}) ==
        doctest::Approx(1.2));
}

TEST_CASE("two-sample KS statistic handles ties") {
  CHECK(ks_statistic({0, 0, 1, 2}, {0, 0, 1, 2}) == 0.0);
  // Atoms at zero of weight 1/2 and 1/4: the gap at 0 is 1/4.
  CHECK(ks_statistic({0, 0, 1, 2}, {0, 1, 2, 3}) == doctest::Approx(0.25));
  CHECK(ks_statistic({1, 2, 3}, {4, 5, 6}) == doctest::Approx(1.0));
}

TEST_CASE("line fit recovers exact lines") {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const auto f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  const std::vector<double> s{1, 1, 1, 1};
  CHECK(fit_line(x, y, s).slope == doctest::Approx(2.0));
}

TEST_CASE("quantiles, moments and binomial standard error") {
  CHECK(empirical_quantile({1, 2, 3, 4, 5}, 0.5) == doctest::Approx(3.0));
  CHECK(empirical_quantile({1, 2, 3, 4, 5}, 1.0) == doctest::Approx(5.0));
  CHECK(binomial_se(0.5, 100) == doctest::Approx(0.05));
  Philox4x32 g(3, 0);
  std::vector<double> z(100000);
  for (double& v : z) v = g.normal();
  CHECK(std::abs(sample_skewness(z)) < 0.05);
  CHECK(std::abs(sample_excess_kurtosis(z)) < 0.1);
}

TEST_CASE("Gauss-Hermite and Gauss-Legendre rules integrate polynomials and Gaussians") {
  CHECK(normal_expectation_gh([](double u) { return u * u; }, 1.0, 2.0) ==
        doctest::Approx(5.0));
  CHECK(normal_expectation_gh([](double u) { return std::cos(u); }, 0.3, 0.7) ==
        doctest::Approx(std::exp(-0.245) * std::cos(0.3)).epsilon(1e-12));
  const double p = normal_expectation_gl([](double) { return 1.0; }, 0.0, 1.0, -1.0, 1.0);
  CHECK(p == doctest::Approx(normal_cdf(1.0) - normal_cdf(-1.0)).epsilon(1e-12));
  double w = 0.0;
  for (double v : gauss_legendre(16).weights) w += v;
  CHECK(w == doctest::Approx(2.0));
  CHECK(normal_pdf(0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)));
}
