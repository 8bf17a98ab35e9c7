#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "catnet/network.hpp"

namespace catnet {

/// A bounded function on the signed state space that the semigroup code can
/// integrate against independent Gaussians in the N_R coordinates.
class Observable {
 public:
  virtual ~Observable() = default;

  virtual double value(std::span<const double> x) const = 0;
  /// E f(U) where U_k ~ N(mean_k, var_k) independently; var_k = 0 means the
  /// coordinate is held at mean_k. Sets *fallback when a quadrature rule
  /// replaced a closed form.
  virtual double gauss_expect(std::span<const double> mean, std::span<const double> var,
                              bool* fallback = nullptr) const = 0;
  /// Upper bound on sup |f| over the signed state space.
  virtual double bound() const = 0;
  virtual int dim() const = 0;
};

/// One-dimensional factor of a separable test function.
struct Factor {
  enum class Kind { Constant, Cosine, GaussianBump, ExpDecay, PolyWindow, SmoothIndicator, Affine, Product };
  Kind kind = Kind::Constant;
  // Constant: p0. Cosine: cos(p0 u + p1). GaussianBump: exp(-p0 (u - p1)^2).
  // ExpDecay: exp(-p0 u). PolyWindow: (1 - s^2)^2 on |s| <= 1, s = (u - p0) / p1.
  // SmoothIndicator: Phi((u - p0)/p2) - Phi((u - p1)/p2). Affine: p0 + p1 u.
  double p0 = 1.0, p1 = 0.0, p2 = 0.0;
  std::vector<Factor> parts;  // Product

  static Factor constant(double c);
  static Factor cosine(double k, double phase);
  static Factor gaussian_bump(double a, double center);
  static Factor exp_decay(double a);
  static Factor poly_window(double center, double half_width);
  static Factor smooth_indicator(double lo, double hi, double eps);
  static Factor affine(double c0, double c1);
  static Factor product(std::vector<Factor> parts);

  double operator()(double u) const;
  /// E factor(m + s Z); closed form for every kind except Product.
  double gauss(double m, double s, bool* fallback = nullptr) const;
  /// sup |factor| on the real line (nonnegative half-line when half_line).
  double sup(bool half_line) const;
  bool is_constant() const { return kind == Kind::Constant; }

  nlohmann::json to_json() const;
  static Factor from_json(const nlohmann::json& j, const std::string& pointer);
};

/// amplitude * prod_k factor_k(x_k).
class TestFunction : public Observable {
 public:
  TestFunction() = default;
  TestFunction(std::string name, double amplitude, std::vector<Factor> factors);

  static TestFunction constant(int d, double c);

  double value(std::span<const double> x) const override;
  double gauss_expect(std::span<const double> mean, std::span<const double> var,
                      bool* fallback = nullptr) const override;
  double bound() const override { return bound_; }
  int dim() const override { return static_cast<int>(factors_.size()); }

  double amplitude() const { return amplitude_; }
  const std::vector<Factor>& factors() const { return factors_; }
  const std::string& name() const { return name_; }

  TestFunction scaled(double c) const;
  /// Pointwise product (Product factors where both sides vary).
  TestFunction times(const TestFunction& g) const;

  /// Throws InvalidArgument if a factor is unbounded on its coordinate's
  /// domain (real line on N_R, half-line elsewhere) unless allowed.
  void check_bounded(const InitialClassification& cls) const;

  nlohmann::json to_json() const;
  static TestFunction from_json(const nlohmann::json& j, int d, const std::string& pointer);

 private:
  void compute_bound();

  std::string name_;
  double amplitude_ = 1.0;
  std::vector<Factor> factors_;
  double bound_ = 1.0;
};

/// sum_m c_m prod_k exp(-a_k (x_k - center_{k, m_k})^2) over a tensor grid
/// of centres. Evaluation contracts per-axis factor values, so the cost is
/// linear in the number of centres.
class TensorBumpSum : public Observable {
 public:
  TensorBumpSum(std::vector<std::vector<double>> axes, std::vector<double> widths,
                std::vector<double> coefficients);

  /// Interpolates `values` given at the grid nodes (row-major, last axis
  /// fastest) with bumps centred at the nodes; width_k = 1/spacing_k^2 * shape.
  static TensorBumpSum interpolate(std::vector<std::vector<double>> axes,
                                   std::span<const double> values, double shape = 1.0);

  double value(std::span<const double> x) const override;
  double gauss_expect(std::span<const double> mean, std::span<const double> var,
                      bool* fallback = nullptr) const override;
  double bound() const override { return bound_; }
  int dim() const override { return static_cast<int>(axes_.size()); }

  const std::vector<std::vector<double>>& axes() const { return axes_; }
  const std::vector<double>& coefficients() const { return coef_; }
  /// Max |node value| the interpolant was built from (0 if built directly).
  double node_sup() const { return node_sup_; }

 private:
  double contract(const std::vector<std::vector<double>>& per_axis) const;

  std::vector<std::vector<double>> axes_;
  std::vector<double> widths_;
  std::vector<double> coef_;
  double bound_ = 0.0;
  double node_sup_ = 0.0;
};

/// Sum of observables with weights (used for linear combinations in checks).
class ObservableSum : public Observable {
 public:
  void add(double weight, std::shared_ptr<const Observable> f);

  double value(std::span<const double> x) const override;
  double gauss_expect(std::span<const double> mean, std::span<const double> var,
                      bool* fallback = nullptr) const override;
  double bound() const override;
  int dim() const override;

 private:
  std::vector<std::pair<double, std::shared_ptr<const Observable>>> terms_;
};

}  // namespace catnet
