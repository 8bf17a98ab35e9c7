#include "catnet/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "catnet/errors.hpp"

namespace catnet {

using nlohmann::json;

struct Expr::Node {
  enum class Kind { Constant, Affine, Bump, Product, Sum } kind = Kind::Constant;
  double c0 = 0.0;
  double c1 = 0.0;
  std::optional<double> floor;
  std::vector<double> vec;  // slope or center
  double r = 0.0;
  std::vector<Expr> terms;
};

double ramp(double s, double r) {
  if (s <= r) return 1.0;
  if (s >= 2.0 * r) return 0.0;
  const double u = s / r - 1.0;
  return 1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
}

Expr::Expr() : Expr(constant(0.0)) {}

Expr Expr::constant(double c) {
  auto n = std::make_shared<Node>();
  n->c0 = c;
  return Expr(std::move(n));
}

Expr Expr::affine(double c0, std::vector<double> slope, std::optional<double> floor) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Affine;
  n->c0 = c0;
  n->vec = std::move(slope);
  n->floor = floor;
  return Expr(std::move(n));
}

Expr Expr::coordinate(int d, int vertex) {
  std::vector<double> slope(d, 0.0);
  slope.at(vertex - 1) = 1.0;
  return affine(0.0, std::move(slope));
}

Expr Expr::bump(double c0, double c1, std::vector<double> center, double r) {
  if (!(r > 0.0)) throw InvalidArgument("bump: radius must be positive");
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Bump;
  n->c0 = c0;
  n->c1 = c1;
  n->vec = std::move(center);
  n->r = r;
  return Expr(std::move(n));
}

Expr Expr::product(std::vector<Expr> terms) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Product;
  n->terms = std::move(terms);
  return Expr(std::move(n));
}

Expr Expr::sum(std::vector<Expr> terms) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Sum;
  n->terms = std::move(terms);
  return Expr(std::move(n));
}

double Expr::operator()(std::span<const double> x) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Node::Kind::Constant:
      return n.c0;
    case Node::Kind::Affine: {
      if (x.size() != n.vec.size()) throw DimensionMismatch("affine: point has wrong length");
      double v = n.c0;
      for (std::size_t i = 0; i < x.size(); ++i) v += n.vec[i] * x[i];
      return n.floor ? std::max(*n.floor, v) : v;
    }
    case Node::Kind::Bump: {
      if (x.size() != n.vec.size()) throw DimensionMismatch("bump: point has wrong length");
      double s2 = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s2 += (x[i] - n.vec[i]) * (x[i] - n.vec[i]);
      return n.c0 + n.c1 * ramp(std::sqrt(s2), n.r);
    }
    case Node::Kind::Product: {
      double v = 1.0;
      for (const auto& t : n.terms) v *= t(x);
      return v;
    }
    case Node::Kind::Sum: {
      double v = 0.0;
      for (const auto& t : n.terms) v += t(x);
      return v;
    }
  }
  return 0.0;
}

std::optional<double> Expr::constant_value() const {
  const Node& n = *node_;
  switch (n.kind) {
    case Node::Kind::Constant:
      return n.c0;
    case Node::Kind::Affine:
      if (std::all_of(n.vec.begin(), n.vec.end(), [](double s) { return s == 0.0; }))
        return n.floor ? std::max(*n.floor, n.c0) : n.c0;
      return std::nullopt;
    case Node::Kind::Bump:
      if (n.c1 == 0.0) return n.c0;
      return std::nullopt;
    case Node::Kind::Product:
    case Node::Kind::Sum: {
      double v = n.kind == Node::Kind::Product ? 1.0 : 0.0;
      for (const auto& t : n.terms) {
        auto c = t.constant_value();
        if (!c) return std::nullopt;
        v = n.kind == Node::Kind::Product ? v * *c : v + *c;
      }
      return v;
    }
  }
  return std::nullopt;
}

json Expr::to_json() const {
  const Node& n = *node_;
  switch (n.kind) {
    case Node::Kind::Constant:
      return n.c0;
    case Node::Kind::Affine: {
      json a{{"c0", n.c0}, {"slope", n.vec}};
      if (n.floor) a["floor"] = *n.floor;
      return json{{"affine", a}};
    }
    case Node::Kind::Bump:
      return json{{"bump", {{"c0", n.c0}, {"c1", n.c1}, {"center", n.vec}, {"r", n.r}}}};
    case Node::Kind::Product:
    case Node::Kind::Sum: {
      json arr = json::array();
      for (const auto& t : n.terms) arr.push_back(t.to_json());
      return json{{n.kind == Node::Kind::Product ? "product" : "sum", arr}};
    }
  }
  return nullptr;
}

namespace {

double get_number(const json& j, const std::string& key, const std::string& ptr) {
  if (!j.contains(key)) throw ConfigError(ptr + "/" + key, "missing");
  if (!j.at(key).is_number()) throw ConfigError(ptr + "/" + key, "expected a number");
  return j.at(key).get<double>();
}

std::vector<double> get_vector(const json& j, const std::string& key, int d,
                               const std::string& ptr) {
  if (!j.contains(key)) throw ConfigError(ptr + "/" + key, "missing");
  const json& v = j.at(key);
  if (!v.is_array() || static_cast<int>(v.size()) != d)
    throw ConfigError(ptr + "/" + key, "expected an array of " + std::to_string(d) + " numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number())
      throw ConfigError(ptr + "/" + key + "/" + std::to_string(i), "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

}  // namespace

Expr Expr::from_json(const json& j, int d, const std::string& ptr) {
  if (j.is_number()) return constant(j.get<double>());
  if (!j.is_object() || j.size() != 1)
    throw ConfigError(ptr, "expression must be a number or a single-key object");
  const auto& [key, body] = *j.items().begin();
  const std::string p = ptr + "/" + key;
  if (key == "const") {
    if (!body.is_number()) throw ConfigError(p, "expected a number");
    return constant(body.get<double>());
  }
  if (key == "affine") {
    if (!body.is_object()) throw ConfigError(p, "expected an object");
    std::optional<double> floor;
    if (body.contains("floor")) floor = get_number(body, "floor", p);
    return affine(get_number(body, "c0", p), get_vector(body, "slope", d, p), floor);
  }
  if (key == "bump") {
    if (!body.is_object()) throw ConfigError(p, "expected an object");
    const double r = get_number(body, "r", p);
    if (!(r > 0.0)) throw ConfigError(p + "/r", "must be positive");
    return bump(get_number(body, "c0", p), get_number(body, "c1", p),
                get_vector(body, "center", d, p), r);
  }
  if (key == "product" || key == "sum") {
    if (!body.is_array() || body.empty()) throw ConfigError(p, "expected a non-empty array");
    std::vector<Expr> terms;
    for (std::size_t i = 0; i < body.size(); ++i)
      terms.push_back(from_json(body[i], d, p + "/" + std::to_string(i)));
    return key == "product" ? product(std::move(terms)) : sum(std::move(terms));
  }
  throw ConfigError(p, "unknown expression kind");
}

double CoefficientField::eval_b(int j, std::span<const double> x) const {
  const double v = b.at(j - 1)(x);
  if (!std::isfinite(v))
    throw EvaluationFailure("b_" + std::to_string(j) + " is not finite");
  return v;
}

double CoefficientField::eval_gamma(int j, std::span<const double> x) const {
  const double v = gamma.at(j - 1)(x);
  if (!std::isfinite(v))
    throw EvaluationFailure("gamma_" + std::to_string(j) + " is not finite");
  if (require_positive_gamma && !(v > 0.0))
    throw EvaluationFailure("gamma_" + std::to_string(j) + " is not positive");
  return v;
}

CoefficientField CoefficientField::constant(int d, double b, double gamma) {
  CoefficientField f;
  f.b.assign(d, Expr::constant(b));
  f.gamma.assign(d, Expr::constant(gamma));
  return f;
}

json CoefficientField::to_json() const {
  json jb = json::array(), jg = json::array();
  for (const auto& e : b) jb.push_back(e.to_json());
  for (const auto& e : gamma) jg.push_back(e.to_json());
  json out{{"b", jb}, {"gamma", jg}, {"alpha", alpha}, {"growth_c", growth_c}};
  out["constant_outside_radius"] =
      constant_outside_radius ? json(*constant_outside_radius) : json(nullptr);
  return out;
}

CoefficientField CoefficientField::from_json(const json& j, int d, const std::string& ptr) {
  if (!j.is_object()) throw ConfigError(ptr, "expected an object");
  CoefficientField f;
  for (const char* key : {"b", "gamma"}) {
    const std::string p = ptr + "/" + key;
    if (!j.contains(key)) throw ConfigError(p, "missing");
    const json& arr = j.at(key);
    if (!arr.is_array() || static_cast<int>(arr.size()) != d)
      throw ConfigError(p, "expected an array of " + std::to_string(d) + " expressions");
    auto& out = std::string(key) == "b" ? f.b : f.gamma;
    for (int i = 0; i < d; ++i) out.push_back(Expr::from_json(arr[i], d, p + "/" + std::to_string(i)));
  }
  if (j.contains("alpha")) {
    f.alpha = get_number(j, "alpha", ptr);
    if (!(f.alpha > 0.0 && f.alpha < 1.0)) throw ConfigError(ptr + "/alpha", "must lie in (0,1)");
  }
  if (j.contains("growth_c")) f.growth_c = get_number(j, "growth_c", ptr);
  if (j.contains("constant_outside_radius") && !j.at("constant_outside_radius").is_null())
    f.constant_outside_radius = get_number(j, "constant_outside_radius", ptr);
  return f;
}

json FrozenCoefficients::to_json() const { return json{{"b0", b0}, {"gamma0", gamma0}}; }

std::string Hypothesis2Report::summary() const {
  std::ostringstream os;
  if (violations.empty())
    os << "no violation found on " << n_samples << " samples";
  else
    os << violations.size() << " violation(s) found on " << n_samples << " samples";
  return os.str();
}

json Hypothesis2Report::to_json() const {
  json v = json::array();
  for (const auto& w : violations)
    v.push_back({{"condition", w.condition}, {"vertex", w.vertex}, {"x", w.x}, {"value", w.value}});
  return json{{"n_samples", n_samples}, {"pass", pass()}, {"summary", summary()}, {"violations", v}};
}

Hypothesis2Report validate_hypothesis2(const CoefficientField& field, const BranchingNetwork& net,
                                       std::span<const std::vector<double>> samples) {
  const int d = net.dim();
  if (field.dim() != d) throw DimensionMismatch("validate_hypothesis2: field dimension");
  Hypothesis2Report rep;
  rep.n_samples = samples.size();
  auto add = [&](std::string cond, int j, const std::vector<double>& x, double v) {
    rep.violations.push_back({std::move(cond), j, x, v});
  };
  for (const auto& x : samples) {
    if (static_cast<int>(x.size()) != d) throw DimensionMismatch("validate_hypothesis2: sample");
    double norm2 = 0.0;
    for (double v : x) {
      if (!(v >= 0.0)) throw InvalidArgument("validate_hypothesis2: sample outside the orthant");
      norm2 += v * v;
    }
    const double growth = field.growth_c * (1.0 + std::sqrt(norm2));
    for (int j = 1; j <= d; ++j) {
      const double bj = field.b[j - 1](x);
      const double gj = field.gamma[j - 1](x);
      if (!std::isfinite(bj)) throw EvaluationFailure("b_" + std::to_string(j) + " not finite");
      if (!std::isfinite(gj)) throw EvaluationFailure("gamma_" + std::to_string(j) + " not finite");
      const std::string tag = "_" + std::to_string(j);
      if (!(gj > 0.0)) add("gamma" + tag + "(x)>0 fails", j, x, gj);
      if (std::abs(bj) > growth) add("|b" + tag + "(x)|<=c(1+|x|) fails", j, x, bj);
      if (x[j - 1] == 0.0) {
        if (bj < 0.0) add("b" + tag + "(x)>=0 at x" + tag + "=0 fails", j, x, bj);
        if ((net.is_catalyst(j) || net.is_reactant(j)) && !(bj > 0.0))
          add("b" + tag + "(x)>0 at x" + tag + "=0 fails", j, x, bj);
      }
    }
  }
  return rep;
}

void check_frozen(const FrozenCoefficients& frozen, const BranchingNetwork& net,
                  const InitialClassification& cls) {
  const int d = net.dim();
  if (static_cast<int>(frozen.b0.size()) != d || static_cast<int>(frozen.gamma0.size()) != d)
    throw DimensionMismatch("frozen coefficients have the wrong length");
  for (int j = 1; j <= d; ++j) {
    const std::string tag = std::to_string(j);
    if (!(frozen.gamma0[j - 1] > 0.0)) throw FrozenDegenerate("gamma0_" + tag + " is not positive");
    if (cls.in_NC2(j) && !(frozen.b0[j - 1] >= 0.0))
      throw FrozenDegenerate("b0_" + tag + " is negative off N_R");
    const bool zero = cls.x0[j - 1] == 0.0;
    if (zero && (net.is_catalyst(j) || net.is_reactant(j)) && !(frozen.b0[j - 1] > 0.0))
      throw FrozenDegenerate("b0_" + tag + " must be positive on (R u C) n Z");
  }
}

FrozenCoefficients freeze(const CoefficientField& field, const BranchingNetwork& net,
                          const InitialClassification& cls) {
  const int d = net.dim();
  if (field.dim() != d || cls.dim() != d) throw DimensionMismatch("freeze: dimensions differ");
  if (!cls.in_S) throw FrozenDegenerate("x0 lies outside the state space S");
  const std::span<const double> x0 = cls.x0;
  FrozenCoefficients fr;
  fr.b0.resize(d);
  fr.gamma0.resize(d);
  for (int j = 1; j <= d; ++j) {
    const double bj = field.b[j - 1](x0);
    const double gj = field.gamma[j - 1](x0);
    if (!std::isfinite(bj) || !std::isfinite(gj))
      throw EvaluationFailure("coefficient " + std::to_string(j) + " not finite at x0");
    switch (cls.role[j - 1]) {
      case InitialClassification::Role::NR:
        fr.b0[j - 1] = bj;
        fr.gamma0[j - 1] = gj * x0[j - 1];
        break;
      case InitialClassification::Role::NC:
        fr.b0[j - 1] = bj;
        fr.gamma0[j - 1] = net.is_reactant(j) ? gj * net.catalyst_mass(j, x0) : gj;
        break;
      case InitialClassification::Role::N2:
        fr.b0[j - 1] = std::max(bj, 0.0);
        fr.gamma0[j - 1] = net.is_reactant(j) ? gj * net.catalyst_mass(j, x0) : gj;
        break;
    }
  }
  check_frozen(fr, net, cls);
  return fr;
}

double m0(const FrozenCoefficients& frozen, const BranchingNetwork& net,
          const InitialClassification& cls) {
  check_frozen(frozen, net, cls);
  double m = 0.0;
  for (int i = 1; i <= net.dim(); ++i) {
    const double g = frozen.gamma0[i - 1];
    m = std::max({m, g, 1.0 / g, std::abs(frozen.b0[i - 1])});
  }
  for (int i : cls.Z)
    if (net.is_catalyst(i) || net.is_reactant(i)) m = std::max(m, 1.0 / frozen.b0[i - 1]);
  return m;
}

CoefficientField tilde_field(const CoefficientField& field, const BranchingNetwork& net,
                             const InitialClassification& cls) {
  const int d = net.dim();
  CoefficientField t = field;
  t.require_positive_gamma = false;
  for (int j = 1; j <= d; ++j) {
    if (cls.in_NR(j)) {
      t.gamma[j - 1] = Expr::product({field.gamma[j - 1], Expr::coordinate(d, j)});
    } else if (net.is_reactant(j)) {
      std::vector<double> slope(d, 0.0);
      for (int i : net.catalysts_of(j)) slope[i - 1] = 1.0;
      t.gamma[j - 1] = Expr::product({field.gamma[j - 1], Expr::affine(0.0, std::move(slope))});
    }
  }
  return t;
}

CoefficientField frozen_field(const FrozenCoefficients& frozen) {
  CoefficientField f;
  for (double v : frozen.b0) f.b.push_back(Expr::constant(v));
  for (double v : frozen.gamma0) f.gamma.push_back(Expr::constant(v));
  return f;
}

CoefficientField localized_perturbation(const FrozenCoefficients& frozen,
                                        std::span<const double> x0, std::span<const double> db,
                                        std::span<const double> dgamma, double r) {
  const std::size_t d = frozen.b0.size();
  if (x0.size() != d || db.size() != d || dgamma.size() != d)
    throw DimensionMismatch("localized_perturbation: lengths differ");
  CoefficientField f;
  const std::vector<double> center(x0.begin(), x0.end());
  for (std::size_t k = 0; k < d; ++k) {
    f.b.push_back(db[k] == 0.0 ? Expr::constant(frozen.b0[k])
                               : Expr::bump(frozen.b0[k], db[k], center, r));
    f.gamma.push_back(dgamma[k] == 0.0 ? Expr::constant(frozen.gamma0[k])
                                       : Expr::bump(frozen.gamma0[k], dgamma[k], center, r));
  }
  f.constant_outside_radius = 2.0 * r;
  return f;
}

double perturbation_size(const CoefficientField& tilde, const FrozenCoefficients& frozen,
                         std::span<const std::vector<double>> samples) {
  const int d = tilde.dim();
  if (static_cast<int>(frozen.b0.size()) != d) throw DimensionMismatch("perturbation_size");
  std::vector<double> sup_b(d, 0.0), sup_g(d, 0.0);
  for (const auto& x : samples)
    for (int k = 0; k < d; ++k) {
      sup_b[k] = std::max(sup_b[k], std::abs(tilde.b[k](x) - frozen.b0[k]));
      sup_g[k] = std::max(sup_g[k], std::abs(tilde.gamma[k](x) - frozen.gamma0[k]));
    }
  double eps = 0.0;
  for (int k = 0; k < d; ++k) eps += sup_b[k] + sup_g[k];
  return eps;
}

}  // namespace catnet
