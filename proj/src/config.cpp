#include "catnet/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "catnet/errors.hpp"

namespace catnet {

using nlohmann::json;

Section::Section(const json& j, std::string pointer) : j_(j), ptr_(std::move(pointer)) {
  if (j_.is_null()) j_ = json::object();
  if (!j_.is_object()) throw ConfigError(ptr_, "expected an object");
}

bool Section::has(const std::string& key) const { return j_.contains(key); }

const json* Section::at(const std::string& key) {
  seen_.push_back(key);
  if (!j_.contains(key)) return nullptr;
  return &j_.at(key);
}

double Section::number(const std::string& key, double def) {
  const json* v = at(key);
  double out = def;
  if (v) {
    if (!v->is_number()) throw ConfigError(pointer(key), "expected a number");
    out = v->get<double>();
    if (!std::isfinite(out)) throw ConfigError(pointer(key), "must be finite");
  }
  resolved_[key] = out;
  return out;
}

double Section::positive(const std::string& key, double def) {
  const double v = number(key, def);
  if (!(v > 0.0)) throw ConfigError(pointer(key), "must be positive");
  return v;
}

std::size_t Section::count(const std::string& key, std::size_t def) {
  const json* v = at(key);
  std::size_t out = def;
  if (v) {
    if (!v->is_number_integer() || v->get<long long>() < 1)
      throw ConfigError(pointer(key), "expected a positive integer");
    out = v->get<std::size_t>();
  }
  resolved_[key] = out;
  return out;
}

int Section::integer(const std::string& key, int def, int lo, int hi) {
  const json* v = at(key);
  int out = def;
  if (v) {
    if (!v->is_number_integer()) throw ConfigError(pointer(key), "expected an integer");
    const long long raw = v->get<long long>();
    if (raw < lo || raw > hi)
      throw ConfigError(pointer(key), "must lie in [" + std::to_string(lo) + ", " +
                                          std::to_string(hi) + "]");
    out = static_cast<int>(raw);
  }
  resolved_[key] = out;
  return out;
}

bool Section::boolean(const std::string& key, bool def) {
  const json* v = at(key);
  bool out = def;
  if (v) {
    if (!v->is_boolean()) throw ConfigError(pointer(key), "expected true or false");
    out = v->get<bool>();
  }
  resolved_[key] = out;
  return out;
}

std::string Section::string(const std::string& key, const std::string& def) {
  const json* v = at(key);
  std::string out = def;
  if (v) {
    if (!v->is_string()) throw ConfigError(pointer(key), "expected a string");
    out = v->get<std::string>();
  }
  resolved_[key] = out;
  return out;
}

namespace {

std::vector<double> read_numbers(const json& j, const std::string& ptr) {
  if (!j.is_array()) throw ConfigError(ptr, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(ptr + "/" + std::to_string(i), "expected a number");
    out.push_back(j[i].get<double>());
    if (!std::isfinite(out.back()))
      throw ConfigError(ptr + "/" + std::to_string(i), "must be finite");
  }
  return out;
}

}  // namespace

std::vector<double> Section::numbers(const std::string& key, std::vector<double> def) {
  const json* v = at(key);
  if (v) def = read_numbers(*v, pointer(key));
  resolved_[key] = def;
  return def;
}

std::vector<std::vector<double>> Section::number_lists(const std::string& key,
                                                       std::vector<std::vector<double>> def) {
  const json* v = at(key);
  if (v) {
    if (!v->is_array()) throw ConfigError(pointer(key), "expected an array of arrays");
    def.clear();
    for (std::size_t i = 0; i < v->size(); ++i)
      def.push_back(read_numbers((*v)[i], pointer(key) + "/" + std::to_string(i)));
  }
  resolved_[key] = def;
  return def;
}

Section Section::child(const std::string& key) {
  const json* v = at(key);
  return Section(v ? *v : json::object(), pointer(key));
}

const json& Section::raw(const std::string& key) {
  static const json null_value;
  const json* v = at(key);
  if (v) resolved_[key] = *v;
  return v ? *v : null_value;
}

void Section::finish() const {
  for (auto it = j_.begin(); it != j_.end(); ++it)
    if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end())
      throw ConfigError(pointer(it.key()), "unknown key");
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json default_config_json() {
  return json{{"network", {{"d", 3}, {"edges", json::array({{1, 2}, {3, 2}})}}},
              {"coefficients", {{"b", {1.0, 1.0, 1.0}}, {"gamma", {1.0, 1.0, 1.0}}}},
              {"x0", {0.0, 1.0, 0.0}},
              {"seed", 2}};
}

std::vector<TestFunction> default_functions(int d) {
  std::vector<Factor> cosines, bumps, windows;
  for (int k = 0; k < d; ++k) {
    cosines.push_back(Factor::cosine(0.8, 0.3 * k));
    bumps.push_back(Factor::gaussian_bump(0.5, 0.5));
    windows.push_back(Factor::smooth_indicator(-1.0, 2.0, 0.5));
  }
  return {TestFunction("cosine", 1.0, std::move(cosines)),
          TestFunction("gaussian_bump", 1.0, std::move(bumps)),
          TestFunction("smooth_window", 1.0, std::move(windows))};
}

namespace {

BranchingNetwork parse_network(Section s) {
  const int d = s.integer("d", 0, 1, 64);
  if (d == 0) throw ConfigError(s.pointer("d"), "missing");
  const json& edges = s.raw("edges");
  std::vector<Edge> list;
  if (!edges.is_null()) {
    if (!edges.is_array()) throw ConfigError(s.pointer("edges"), "expected an array of pairs");
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const std::string p = s.pointer("edges") + "/" + std::to_string(e);
      const json& pair = edges[e];
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() ||
          !pair[1].is_number_integer())
        throw ConfigError(p, "expected a pair of vertex labels");
      list.emplace_back(pair[0].get<int>(), pair[1].get<int>());
    }
  }
  s.finish();
  try {
    return BranchingNetwork::build(d, list);
  } catch (const Error& e) {
    throw ConfigError(s.pointer("edges"), e.what());
  }
}

std::vector<TestFunction> parse_functions(Section& s, int d) {
  const json& raw = s.raw("functions");
  if (raw.is_null()) {
    auto fs = default_functions(d);
    json arr = json::array();
    for (const auto& f : fs) arr.push_back(f.to_json());
    s.record("functions", std::move(arr));
    return fs;
  }
  if (!raw.is_array() || raw.empty())
    throw ConfigError(s.pointer("functions"), "expected a non-empty array");
  std::vector<TestFunction> out;
  for (std::size_t i = 0; i < raw.size(); ++i)
    out.push_back(TestFunction::from_json(raw[i], d, s.pointer("functions") + "/" + std::to_string(i)));
  return out;
}

std::vector<std::vector<double>> default_axes(std::span<const double> x0) {
  std::vector<std::vector<double>> axes;
  for (double v : x0) axes.push_back({v, v + 0.5, v + 1.0});
  return axes;
}

void check_axes(const std::vector<std::vector<double>>& axes, int d, const std::string& ptr) {
  if (static_cast<int>(axes.size()) != d)
    throw ConfigError(ptr, "expected one axis per coordinate (" + std::to_string(d) + ")");
  for (std::size_t k = 0; k < axes.size(); ++k) {
    if (axes[k].empty()) throw ConfigError(ptr + "/" + std::to_string(k), "empty axis");
    if (!std::is_sorted(axes[k].begin(), axes[k].end()) ||
        std::adjacent_find(axes[k].begin(), axes[k].end()) != axes[k].end())
      throw ConfigError(ptr + "/" + std::to_string(k), "axis must be strictly increasing");
  }
}

void check_positive_list(const std::vector<double>& v, const std::string& ptr) {
  if (v.empty()) throw ConfigError(ptr, "must not be empty");
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!(v[i] > 0.0)) throw ConfigError(ptr + "/" + std::to_string(i), "must be positive");
}

}  // namespace

RunConfig parse_run_config(const json& j) {
  RunConfig cfg;
  Section top(j, "");
  json resolved = json::object();

  {
    Section s = top.child("network");
    if (!top.has("network")) throw ConfigError("/network", "missing");
    cfg.net = parse_network(s);
    resolved["network"] = cfg.net.to_json();
  }
  const int d = cfg.net.dim();

  {
    const json& raw = top.raw("x0");
    if (raw.is_null()) throw ConfigError("/x0", "missing");
    cfg.x0 = read_numbers(raw, "/x0");
    if (static_cast<int>(cfg.x0.size()) != d)
      throw ConfigError("/x0", "expected " + std::to_string(d) + " numbers");
    resolved["x0"] = cfg.x0;
  }

  {
    const json& raw = top.raw("coefficients");
    cfg.field = raw.is_null() ? CoefficientField::constant(d, 1.0, 1.0)
                              : CoefficientField::from_json(raw, d, "/coefficients");
    resolved["coefficients"] = cfg.field.to_json();
  }

  {
    const json& raw = top.raw("seed");
    if (!raw.is_null()) {
      if (!raw.is_number_integer() || raw.get<long long>() < 0)
        throw ConfigError("/seed", "expected a non-negative integer");
      cfg.seed = raw.get<std::uint64_t>();
    }
  }
  cfg.output_dir = top.string("output_dir", "out");
  resolved["output_dir"] = cfg.output_dir;

  {
    Section s = top.child("simulate");
    auto& p = cfg.simulate;
    p.dt = s.positive("dt", p.dt);
    p.T = s.positive("T", p.T);
    p.n_paths = s.count("n_paths", p.n_paths);
    p.record_every = s.integer("record_every", p.record_every, 0, 1 << 30);
    p.reference = s.boolean("reference", p.reference);
    s.finish();
    resolved["simulate"] = s.resolved();
  }
  {
    Section s = top.child("semigroup");
    auto& p = cfg.semigroup;
    p.t = s.numbers("t", p.t);
    check_positive_list(p.t, "/semigroup/t");
    p.n_paths = s.count("n_paths", p.n_paths);
    p.n_steps = s.integer("n_steps", p.n_steps, 1, 1 << 20);
    p.functions = parse_functions(s, d);
    s.finish();
    resolved["semigroup"] = s.resolved();
  }
  {
    Section s = top.child("moments");
    auto& p = cfg.moments;
    p.t = s.numbers("t", p.t);
    check_positive_list(p.t, "/moments/t");
    p.n_paths = s.count("n_paths", p.n_paths);
    p.n_steps = s.integer("n_steps", p.n_steps, 1, 1 << 20);
    p.gamma_scale = s.positive("gamma_scale", p.gamma_scale);
    s.finish();
    resolved["moments"] = s.resolved();
  }
  {
    Section s = top.child("norms");
    auto& p = cfg.norms;
    p.alpha = s.number("alpha", cfg.field.alpha);
    if (!(p.alpha > 0.0 && p.alpha < 1.0)) throw ConfigError("/norms/alpha", "must lie in (0,1)");
    p.axes = s.number_lists("axes", default_axes(cfg.x0));
    check_axes(p.axes, d, "/norms/axes");
    p.scales = s.numbers("scales", p.scales);
    check_positive_list(p.scales, "/norms/scales");
    p.t_grid = s.numbers("t_grid", p.t_grid);
    check_positive_list(p.t_grid, "/norms/t_grid");
    p.mc.n_paths = s.count("n_paths", p.mc.n_paths);
    p.mc.steps_per_node = s.integer("steps_per_node", p.mc.steps_per_node, 1, 1 << 16);
    p.functions = parse_functions(s, d);
    s.finish();
    resolved["norms"] = s.resolved();
  }
  {
    Section s = top.child("resolvent");
    auto& p = cfg.resolvent;
    p.lambdas = s.numbers("lambdas", p.lambdas);
    check_positive_list(p.lambdas, "/resolvent/lambdas");
    p.axes = s.number_lists("axes", default_axes(cfg.x0));
    check_axes(p.axes, d, "/resolvent/axes");
    auto& rc = p.resolvent;
    rc.t_min = s.positive("t_min", rc.t_min);
    rc.ratio = s.number("ratio", rc.ratio);
    if (!(rc.ratio > 1.0)) throw ConfigError("/resolvent/ratio", "must exceed 1");
    rc.t_max_factor = s.positive("t_max_factor", rc.t_max_factor);
    rc.substeps = s.integer("substeps", rc.substeps, 1, 1 << 12);
    rc.n_paths = s.count("n_paths", rc.n_paths);
    rc.fd_step_nr = s.positive("fd_step_nr", rc.fd_step_nr);
    rc.fd_step_nc2 = s.positive("fd_step_nc2", rc.fd_step_nc2);
    p.eps_max = s.positive("eps_max", p.eps_max);
    p.functions = parse_functions(s, d);
    const json& tilde = s.raw("tilde");
    if (!tilde.is_null()) {
      p.tilde = CoefficientField::from_json(tilde, d, "/resolvent/tilde");
      p.tilde->require_positive_gamma = false;
    }
    const double db = 0.03 / d, dg = 0.015 / d;
    p.db = s.numbers("db", std::vector<double>(d, db));
    p.dgamma = s.numbers("dgamma", std::vector<double>(d, dg));
    if (static_cast<int>(p.db.size()) != d)
      throw ConfigError("/resolvent/db", "expected " + std::to_string(d) + " numbers");
    if (static_cast<int>(p.dgamma.size()) != d)
      throw ConfigError("/resolvent/dgamma", "expected " + std::to_string(d) + " numbers");
    p.bump_radius = s.positive("bump_radius", p.bump_radius);
    p.run_series = s.boolean("series", p.run_series);
    p.series_lambda = s.number("series_lambda", p.series_lambda);
    if (p.series_lambda < 0.0) throw ConfigError("/resolvent/series_lambda", "must be >= 0");
    p.series_terms = s.integer("series_terms", p.series_terms, 3, 16);
    s.finish();
    resolved["resolvent"] = s.resolved();
  }
  {
    Section s = top.child("verify");
    auto& p = cfg.verify;
    const auto checks = s.numbers("checks", {1, 2, 3, 4, 5, 6, 7, 8, 9});
    p.checks.clear();
    for (std::size_t i = 0; i < checks.size(); ++i) {
      const double c = checks[i];
      if (c != std::floor(c) || c < 1 || c > 9)
        throw ConfigError("/verify/checks/" + std::to_string(i), "expected a criterion in 1..9");
      p.checks.push_back(static_cast<int>(c));
    }
    std::sort(p.checks.begin(), p.checks.end());
    p.checks.erase(std::unique(p.checks.begin(), p.checks.end()), p.checks.end());
    if (s.has("n_paths")) p.n_paths = s.count("n_paths", 1);
    p.mutate_gamma = s.positive("mutate_gamma", p.mutate_gamma);
    s.finish();
    resolved["verify"] = s.resolved();
  }
  top.finish();

  cfg.hash = fnv1a(resolved.dump());
  resolved["seed"] = cfg.seed;
  cfg.resolved = std::move(resolved);
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  return parse_run_config(j);
}

}  // namespace catnet
