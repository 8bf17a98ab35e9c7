#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "catnet/network.hpp"

namespace catnet {

/// Localisation profile: 1 on [0, r], 0 on [2r, inf), quintic smoothstep
/// (twice continuously differentiable) in between.
double ramp(double s, double r);

/// Coefficient expression from a closed family so that fields serialise
/// into configs. Immutable; copies share the node tree.
///
/// JSON grammar:
///   number                                   constant
///   {"const": c}                             constant
///   {"affine": {"c0": a, "slope": [..d..], "floor": f}}
///                                            max(f, a + <slope, x>), floor optional
///   {"bump": {"c0": a, "c1": b, "center": [..d..], "r": r}}
///                                            a + b * ramp(|x - center|, r)
///   {"product": [e, e, ...]}                 product of terms
///   {"sum": [e, e, ...]}                     sum of terms
class Expr {
 public:
  Expr();  // constant 0

  static Expr constant(double c);
  static Expr affine(double c0, std::vector<double> slope,
                     std::optional<double> floor = std::nullopt);
  static Expr coordinate(int d, int vertex);
  static Expr bump(double c0, double c1, std::vector<double> center, double r);
  static Expr product(std::vector<Expr> terms);
  static Expr sum(std::vector<Expr> terms);

  double operator()(std::span<const double> x) const;
  /// Value if the expression does not depend on x.
  std::optional<double> constant_value() const;

  nlohmann::json to_json() const;
  /// `pointer` prefixes error messages (JSON pointer of `j`).
  static Expr from_json(const nlohmann::json& j, int d, const std::string& pointer = "");

  struct Node;

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

/// Drift and branching-rate evaluators per vertex plus declared metadata.
struct CoefficientField {
  std::vector<Expr> b;
  std::vector<Expr> gamma;
  double alpha = 0.5;      // declared Hoelder index
  double growth_c = 1.0;   // declared linear-growth constant
  std::optional<double> constant_outside_radius;
  /// Evaluation rejects gamma <= 0 when set. Tilde fields may vanish on
  /// the boundary, so they clear it.
  bool require_positive_gamma = true;

  int dim() const { return static_cast<int>(b.size()); }
  /// Throws EvaluationFailure for non-finite values.
  double eval_b(int j, std::span<const double> x) const;
  /// Throws EvaluationFailure for non-finite values, and for gamma <= 0 when
  /// require_positive_gamma is set.
  double eval_gamma(int j, std::span<const double> x) const;

  static CoefficientField constant(int d, double b, double gamma);

  nlohmann::json to_json() const;
  static CoefficientField from_json(const nlohmann::json& j, int d,
                                    const std::string& pointer = "");
};

struct FrozenCoefficients {
  std::vector<double> b0;
  std::vector<double> gamma0;

  nlohmann::json to_json() const;
};

struct Hypothesis2Violation {
  std::string condition;
  int vertex = 0;
  std::vector<double> x;
  double value = 0.0;
};

struct Hypothesis2Report {
  std::size_t n_samples = 0;
  std::vector<Hypothesis2Violation> violations;

  bool pass() const { return violations.empty(); }
  /// "no violation found on N samples" or a count of violations; a sample
  /// based check never claims the hypothesis holds.
  std::string summary() const;
  nlohmann::json to_json() const;
};

Hypothesis2Report validate_hypothesis2(const CoefficientField& field, const BranchingNetwork& net,
                                       std::span<const std::vector<double>> samples);

/// Frozen constants of the reference generator at cls.x0. Throws
/// FrozenDegenerate when x0 lies outside S or the sign conditions fail.
FrozenCoefficients freeze(const CoefficientField& field, const BranchingNetwork& net,
                          const InitialClassification& cls);

/// Throws FrozenDegenerate unless gamma0 > 0, b0 >= 0 off N_R and b0 > 0 on
/// (R u C) n Z.
void check_frozen(const FrozenCoefficients& frozen, const BranchingNetwork& net,
                  const InitialClassification& cls);

double m0(const FrozenCoefficients& frozen, const BranchingNetwork& net,
          const InitialClassification& cls);

/// The field whose generator takes the reference form: gamma_j * x_j on N_R,
/// gamma_i * sum_{C_i} x on N_C2 n R, gamma_i elsewhere; b unchanged.
CoefficientField tilde_field(const CoefficientField& field, const BranchingNetwork& net,
                             const InitialClassification& cls);

/// Field with the frozen constants everywhere.
CoefficientField frozen_field(const FrozenCoefficients& frozen);

/// Frozen constants plus bumps db_k, dgamma_k * ramp(|x - x0|, r); agrees
/// with the frozen field outside the ball of radius 2r.
CoefficientField localized_perturbation(const FrozenCoefficients& frozen,
                                        std::span<const double> x0, std::span<const double> db,
                                        std::span<const double> dgamma, double r);

/// sum_k sup|gamma~_k - gamma0_k| + sup|b~_k - b0_k| over the samples.
double perturbation_size(const CoefficientField& tilde, const FrozenCoefficients& frozen,
                         std::span<const std::vector<double>> samples);

}  // namespace catnet
