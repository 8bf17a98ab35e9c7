#include "catnet/norms.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "catnet/a0_paths.hpp"
#include "catnet/errors.hpp"

namespace catnet {

using nlohmann::json;

void GridSpec::validate(const InitialClassification& cls) const {
  const int d = cls.dim();
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("grid: alpha must lie in (0, 1)");
  for (const auto& x : points) {
    if (static_cast<int>(x.size()) != d) throw DimensionMismatch("grid: point length");
    if (!in_S0(cls, x)) throw InvalidArgument("grid: point outside S0");
  }
  for (const auto& dsp : displacements) {
    if (dsp.i < 1 || dsp.i > d || cls.in_NR(dsp.i))
      throw InvalidArgument("grid: displacement index must be a vertex of N_C2");
    if (static_cast<int>(dsp.h.size()) != d) throw DimensionMismatch("grid: displacement length");
    const auto& rb = cls.rbar(dsp.i);
    bool nonzero = false;
    for (int k = 1; k <= d; ++k) {
      const double hk = dsp.h[k - 1];
      if (hk != 0.0) nonzero = true;
      const bool allowed = k == dsp.i || std::binary_search(rb.begin(), rb.end(), k);
      if (!allowed && hk != 0.0)
        throw InvalidArgument("grid: displacement for vertex " + std::to_string(dsp.i) +
                              " moves coordinate " + std::to_string(k));
      if (!cls.in_NR(k) && hk < 0.0)
        throw InvalidArgument("grid: negative displacement in N_C2 coordinate " +
                              std::to_string(k));
    }
    if (!nonzero) throw InvalidArgument("grid: zero displacement");
    if (rb.empty() && !(dsp.h[dsp.i - 1] > 0.0))
      throw InvalidArgument("grid: N_2 displacement needs h_i > 0");
  }
}

std::vector<std::vector<double>> tensor_grid(const std::vector<std::vector<double>>& axes) {
  std::vector<std::vector<double>> pts;
  const std::size_t d = axes.size();
  std::vector<std::size_t> idx(d, 0);
  for (const auto& a : axes)
    if (a.empty()) throw EmptyGrid("tensor grid: empty axis");
  for (;;) {
    std::vector<double> x(d);
    for (std::size_t k = 0; k < d; ++k) x[k] = axes[k][idx[k]];
    pts.push_back(std::move(x));
    int k = static_cast<int>(d) - 1;
    while (k >= 0 && ++idx[k] == axes[k].size()) idx[k--] = 0;
    if (k < 0) break;
  }
  return pts;
}

GridSpec GridSpec::tensor(const InitialClassification& cls, double alpha,
                          const std::vector<std::vector<double>>& axes,
                          std::span<const double> scales) {
  const int d = cls.dim();
  if (static_cast<int>(axes.size()) != d) throw DimensionMismatch("grid: one axis per coordinate");
  GridSpec g;
  g.alpha = alpha;
  g.points = tensor_grid(axes);
  const double r2 = 1.0 / std::sqrt(2.0);
  for (int i : cls.NC2())
    for (double s : scales) {
      std::vector<double> h(d, 0.0);
      h[i - 1] = s;
      g.displacements.push_back({i, h});
      for (int j : cls.rbar(i)) {
        for (double sign : {1.0, -1.0}) {
          std::vector<double> a(d, 0.0), b(d, 0.0);
          a[j - 1] = sign * s;
          b[i - 1] = s * r2;
          b[j - 1] = sign * s * r2;
          g.displacements.push_back({i, a});
          g.displacements.push_back({i, b});
        }
      }
    }
  g.validate(cls);
  return g;
}

json SeminormResult::to_json() const {
  return json{{"index", index}, {"values", values}, {"weak", weak}};
}

SeminormResult weighted_seminorm(const PointFunction& f, const InitialClassification& cls,
                                 const GridSpec& grid) {
  if (grid.points.empty() || grid.displacements.empty())
    throw EmptyGrid("weighted_seminorm: grid has no points or no displacements");
  grid.validate(cls);
  SeminormResult res;
  res.index = cls.NC2();
  res.values.assign(res.index.size(), 0.0);
  const double a = grid.alpha;
  std::vector<double> fx(grid.points.size());
  for (std::size_t q = 0; q < grid.points.size(); ++q) fx[q] = f(grid.points[q]);
  std::vector<double> y(cls.dim());
  for (const auto& dsp : grid.displacements) {
    const auto c = static_cast<std::size_t>(
        std::lower_bound(res.index.begin(), res.index.end(), dsp.i) - res.index.begin());
    double hn = 0.0;
    for (double v : dsp.h) hn += v * v;
    hn = std::sqrt(hn);
    for (std::size_t q = 0; q < grid.points.size(); ++q) {
      const auto& x = grid.points[q];
      for (std::size_t k = 0; k < y.size(); ++k) y[k] = x[k] + dsp.h[k];
      const double w =
          std::max(std::pow(hn, -a) * std::pow(x[dsp.i - 1], 0.5 * a), std::pow(hn, -0.5 * a));
      res.values[c] = std::max(res.values[c], std::abs(f(y) - fx[q]) * w);
    }
  }
  for (double v : res.values) res.weak = std::max(res.weak, v);
  return res;
}

SeminormResult weighted_seminorm(const Observable& f, const InitialClassification& cls,
                                 const GridSpec& grid) {
  return weighted_seminorm([&f](std::span<const double> x) { return f.value(x); }, cls, grid);
}

json SemigroupNormResult::to_json() const {
  return json{{"estimate", estimate}, {"band_lo", band_lo},   {"band_hi", band_hi},
              {"argmax_t", argmax_t}, {"argmax_x", argmax_x}};
}

std::vector<SemigroupNormResult> semigroup_norms(
    std::span<const Observable* const> fs, const BranchingNetwork& net,
    const InitialClassification& cls, const FrozenCoefficients& frozen, double alpha,
    std::span<const double> t_grid, const std::vector<std::vector<double>>& x_grid,
    const NormMcConfig& mc) {
  if (t_grid.empty() || x_grid.empty()) throw EmptyGrid("semigroup_norm: empty t or x grid");
  std::vector<double> ts(t_grid.begin(), t_grid.end());
  std::sort(ts.begin(), ts.end());
  const auto sk = Skeleton::with_nodes(ts, mc.steps_per_node);
  const VertexSet nc2 = cls.NC2();
  // Points sharing their N_C2 coordinates share one catalyst ensemble.
  std::map<std::vector<double>, std::vector<std::size_t>> groups;
  for (std::size_t q = 0; q < x_grid.size(); ++q) {
    std::vector<double> key;
    for (int v : nc2) key.push_back(x_grid[q][v - 1]);
    groups[key].push_back(q);
  }
  std::vector<SemigroupNormResult> out(fs.size());
  for (const auto& [key, members] : groups) {
    const auto& x_rep = x_grid[members.front()];
    const auto ens = CatalystEnsemble::sample(net, cls, frozen, x_rep, sk,
                                              CatalystConfig{mc.n_paths, mc.seed, 1.0, 0.0});
    for (std::size_t q : members) {
      const auto& x = x_grid[q];
      for (std::size_t fi = 0; fi < fs.size(); ++fi) {
        const double fx = fs[fi]->value(x);
        for (std::size_t k = 1; k < ens.n_nodes(); ++k) {
          const double t = ens.node_time(k);
          const Estimate e = ens.expect(*fs[fi], k, x);
          const double scale = std::pow(t, -0.5 * alpha);
          const double v = std::abs(e.mean - fx) * scale;
          auto& r = out[fi];
          if (v > r.estimate) {
            r.estimate = v;
            r.argmax_t = t;
            r.argmax_x = x;
          }
          r.band_lo = std::max(r.band_lo, std::max(0.0, std::abs(e.mean - fx) - 2.0 * e.std_err) * scale);
          r.band_hi = std::max(r.band_hi, (std::abs(e.mean - fx) + 2.0 * e.std_err) * scale);
        }
      }
    }
  }
  return out;
}

SemigroupNormResult semigroup_norm(const Observable& f, const BranchingNetwork& net,
                                   const InitialClassification& cls,
                                   const FrozenCoefficients& frozen, double alpha,
                                   std::span<const double> t_grid,
                                   const std::vector<std::vector<double>>& x_grid,
                                   const NormMcConfig& mc) {
  const Observable* p = &f;
  return semigroup_norms(std::span<const Observable* const>(&p, 1), net, cls, frozen, alpha,
                         t_grid, x_grid, mc)
      .front();
}

json EquivalenceReport::to_json() const {
  json arr = json::array();
  for (const auto& r : rows)
    arr.push_back(json{{"name", r.name},
                       {"weak", r.weak},
                       {"semigroup", r.semigroup.to_json()},
                       {"ratio", r.ratio}});
  return json{{"rows", arr},
              {"min_ratio", min_ratio},
              {"max_ratio", max_ratio},
              {"spread", spread},
              {"spread_bound", spread_bound},
              {"pass", pass}};
}

EquivalenceReport equivalence_check(std::span<const TestFunction> family,
                                    const BranchingNetwork& net, const InitialClassification& cls,
                                    const FrozenCoefficients& frozen, const NormGrids& grids,
                                    double spread_bound) {
  if (family.size() < 10)
    throw InvalidArgument("equivalence_check: need at least 10 functions");
  EquivalenceReport rep;
  rep.spread_bound = spread_bound;
  std::vector<const Observable*> ptrs;
  for (const auto& f : family) ptrs.push_back(&f);
  for (const auto& f : family) {
    EquivalenceRow row;
    row.name = f.name();
    row.weak = weighted_seminorm(f, cls, grids.seminorm).weak;
    if (row.weak == 0.0)
      throw DegenerateFamily("equivalence_check: function '" + f.name() +
                             "' has zero weak norm on the grid");
    rep.rows.push_back(row);
  }
  const auto sn = semigroup_norms(ptrs, net, cls, frozen, grids.seminorm.alpha, grids.t_grid,
                                  grids.x_grid, grids.mc);
  rep.min_ratio = INFINITY;
  bool finite = true;
  for (std::size_t q = 0; q < rep.rows.size(); ++q) {
    auto& row = rep.rows[q];
    row.semigroup = sn[q];
    row.ratio = sn[q].estimate / row.weak;
    finite = finite && std::isfinite(row.ratio) && row.ratio > 0.0;
    rep.min_ratio = std::min(rep.min_ratio, row.ratio);
    rep.max_ratio = std::max(rep.max_ratio, row.ratio);
  }
  rep.spread = rep.min_ratio > 0.0 ? rep.max_ratio / rep.min_ratio : INFINITY;
  rep.pass = finite && rep.spread <= spread_bound;
  return rep;
}

json ProductRuleReport::to_json() const {
  json arr = json::array();
  for (const auto& r : rows)
    arr.push_back(json{{"f", r.f},
                       {"g", r.g},
                       {"lhs", r.lhs},
                       {"weak_f", r.weak_f},
                       {"sup_f", r.sup_f},
                       {"sup_g", r.sup_g},
                       {"semigroup_g", r.semigroup_g},
                       {"c_fit", r.c_fit}});
  return json{{"rows", arr},
              {"c", c},
              {"c_spread", c_spread},
              {"spread_bound", spread_bound},
              {"pass", pass}};
}

ProductRuleReport product_rule_check(std::span<const std::pair<TestFunction, TestFunction>> pairs,
                                     const BranchingNetwork& net, const InitialClassification& cls,
                                     const FrozenCoefficients& frozen, const NormGrids& grids,
                                     double spread_bound) {
  ProductRuleReport rep;
  rep.spread_bound = spread_bound;
  double cmin = INFINITY, cmax = 0.0;
  for (const auto& [f, g] : pairs) {
    const TestFunction fg = f.times(g);
    const Observable* ptrs[2] = {&fg, &g};
    const auto sn = semigroup_norms(ptrs, net, cls, frozen, grids.seminorm.alpha, grids.t_grid,
                                    grids.x_grid, grids.mc);
    ProductRuleRow row;
    row.f = f.name();
    row.g = g.name();
    row.lhs = sn[0].estimate;
    row.semigroup_g = sn[1].estimate;
    row.weak_f = weighted_seminorm(f, cls, grids.seminorm).weak;
    row.sup_f = f.bound();
    row.sup_g = g.bound();
    const double excess = row.lhs - row.sup_f * row.semigroup_g;
    const double denom = row.weak_f * row.sup_g;
    if (excess > 0.0) row.c_fit = denom > 0.0 ? excess / denom : INFINITY;
    if (row.c_fit > 0.0) {
      cmin = std::min(cmin, row.c_fit);
      cmax = std::max(cmax, row.c_fit);
    }
    rep.rows.push_back(row);
  }
  rep.c = cmax;
  rep.c_spread = cmax > 0.0 ? cmax / cmin : 1.0;
  rep.pass = std::isfinite(rep.c) && rep.c_spread <= spread_bound;
  for (const auto& r : rep.rows)
    rep.pass = rep.pass && r.lhs <= rep.c * r.weak_f * r.sup_g + r.sup_f * r.semigroup_g + 1e-12;
  return rep;
}

}  // namespace catnet
