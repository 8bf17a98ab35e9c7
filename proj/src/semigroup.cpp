#include "catnet/semigroup.hpp"

#include <algorithm>
#include <cmath>

#include "catnet/errors.hpp"

namespace catnet {

using nlohmann::json;

namespace {

json line_json(const LineFit& f) {
  return json{{"slope", f.slope}, {"intercept", f.intercept}, {"slope_se", f.slope_se}};
}

}  // namespace

double eval_G(const FrozenCoefficients& frozen, const InitialClassification& cls, double t,
              std::span<const double> x_NR, std::span<const double> y_NR,
              std::span<const double> z_NC2, const Observable& f, bool* fallback) {
  const int d = cls.dim();
  const VertexSet nc2 = cls.NC2();
  if (x_NR.size() != cls.N_R.size() || y_NR.size() != cls.N_R.size() ||
      z_NC2.size() != nc2.size() || f.dim() != d)
    throw DimensionMismatch("eval_G: argument sizes do not match the classification");
  std::vector<double> mean(d), var(d, 0.0);
  for (std::size_t r = 0; r < cls.N_R.size(); ++r) {
    const int j = cls.N_R[r];
    if (!(y_NR[r] >= 0.0)) throw InvalidArgument("eval_G: y must be nonnegative");
    mean[j - 1] = x_NR[r] + frozen.b0[j - 1] * t;
    var[j - 1] = 2.0 * frozen.gamma0[j - 1] * y_NR[r];
  }
  for (std::size_t c = 0; c < nc2.size(); ++c) mean[nc2[c] - 1] = z_NC2[c];
  return f.gauss_expect(mean, var, fallback);
}

Estimate pt_f(const BranchingNetwork& net, const InitialClassification& cls,
              const FrozenCoefficients& frozen, std::span<const double> x, double t,
              const Observable& f, const PtConfig& cfg, bool* fallback) {
  if (!(t > 0.0)) throw InvalidArgument("pt_f: t must be positive");
  const auto sk = Skeleton::uniform(t, cfg.n_steps);
  const auto ens = CatalystEnsemble::sample(net, cls, frozen, x, sk,
                                            CatalystConfig{cfg.n_paths, cfg.seed, 1.0, 0.0});
  return ens.expect(f, 1, x, fallback);
}

void to_json(json& j, const MomentOracles& m) {
  j = json{{"mean_sum", m.mean_sum},
           {"second_moment_sum", m.second_moment_sum},
           {"second_moment_increment", m.second_moment_increment},
           {"mean_integral", m.mean_integral}};
}

MomentOracles moment_oracles(const BranchingNetwork& net, const InitialClassification& cls,
                             const FrozenCoefficients& frozen, std::span<const double> x, double t,
                             int j) {
  if (j < 1 || j > net.dim() || !cls.in_NR(j))
    throw NotInNR("moment_oracles: vertex " + std::to_string(j) + " is not in N_R");
  if (static_cast<int>(x.size()) != net.dim()) throw DimensionMismatch("moment_oracles: x length");
  if (!(t >= 0.0)) throw InvalidArgument("moment_oracles: t must be nonnegative");
  const auto& C = net.catalysts_of(j);
  double X = 0.0, B = 0.0;
  for (int i : C) {
    X += x[i - 1];
    B += frozen.b0[i - 1];
  }
  MomentOracles m;
  m.second_moment_sum = X * X;
  for (int i : C) {
    const double xi = x[i - 1], bi = frozen.b0[i - 1], gi = frozen.gamma0[i - 1];
    m.mean_sum += xi + bi * t;
    m.second_moment_sum += 2.0 * (B + gi) * xi * t + (B + gi) * bi * t * t;
    m.second_moment_increment += 2.0 * gi * xi * t + (B + gi) * bi * t * t;
    m.mean_integral += xi * t + 0.5 * bi * t * t;
  }
  return m;
}

json MomentReport::to_json() const {
  json arr = json::array();
  for (const auto& c : checks)
    arr.push_back(json{{"j", c.j},
                       {"identity", c.identity},
                       {"estimate", c.estimate},
                       {"oracle", c.oracle},
                       {"z", c.z}});
  return json{{"t", t},          {"n_paths", n_paths}, {"gamma_scale", gamma_scale},
              {"z_limit", z_limit}, {"checks", arr},     {"pass", pass}};
}

MomentReport verify_moments(const BranchingNetwork& net, const InitialClassification& cls,
                            const FrozenCoefficients& frozen, std::span<const double> x, double t,
                            std::size_t n_paths, std::uint64_t seed, double gamma_scale,
                            int n_steps) {
  MomentReport rep;
  rep.t = t;
  rep.n_paths = n_paths;
  rep.gamma_scale = gamma_scale;
  static const char* names[4] = {"mean_sum", "second_moment_sum", "second_moment_increment",
                                 "mean_integral"};
  if (t == 0.0) {
    for (int j : cls.N_R) {
      const auto m = moment_oracles(net, cls, frozen, x, 0.0, j);
      const double exact[4] = {m.mean_sum, m.second_moment_sum, m.second_moment_increment,
                               m.mean_integral};
      for (int q = 0; q < 4; ++q)
        rep.checks.push_back(MomentCheck{j, names[q], Estimate{exact[q], 0.0, n_paths}, exact[q], 0.0});
    }
    return rep;
  }
  const auto sk = Skeleton::uniform(t, n_steps);
  const auto ens = CatalystEnsemble::sample(net, cls, frozen, x, sk,
                                            CatalystConfig{n_paths, seed, gamma_scale, 0.0});
  const VertexSet nc2 = cls.NC2();
  for (std::size_t r = 0; r < cls.N_R.size(); ++r) {
    const int j = cls.N_R[r];
    const auto m = moment_oracles(net, cls, frozen, x, t, j);
    std::vector<std::size_t> idx;
    double X = 0.0;
    for (int i : net.catalysts_of(j)) {
      idx.push_back(static_cast<std::size_t>(std::lower_bound(nc2.begin(), nc2.end(), i) - nc2.begin()));
      X += x[i - 1];
    }
    Accumulator acc[4];
    for (std::size_t p = 0; p < n_paths; ++p) {
      double S = 0.0;
      for (std::size_t c : idx) S += ens.z(p, 1, c);
      acc[0].add(S);
      acc[1].add(S * S);
      acc[2].add((S - X) * (S - X));
      acc[3].add(ens.catalyst_integral(p, 1, r));
    }
    const double oracle[4] = {m.mean_sum, m.second_moment_sum, m.second_moment_increment,
                              m.mean_integral};
    for (int q = 0; q < 4; ++q) {
      MomentCheck c{j, names[q], acc[q].result(), oracle[q], 0.0};
      c.z = Estimate::z_score(c.estimate, oracle[q]);
      if (!(c.z <= rep.z_limit)) rep.pass = false;
      rep.checks.push_back(c);
    }
  }
  return rep;
}

json InverseMomentReport::to_json() const {
  json arr = json::array();
  for (const auto& r : rows)
    arr.push_back(json{{"t", r.t},
                       {"estimate", r.estimate},
                       {"cap", r.cap},
                       {"n_capped", r.n_capped},
                       {"bound_shape", r.bound_shape},
                       {"fitted_constant", r.fitted_constant}});
  return json{{"j", j},
              {"p", p},
              {"x", x},
              {"rows", arr},
              {"loglog", line_json(loglog)},
              {"constant_spread", constant_spread}};
}

InverseMomentReport inverse_moment_probe(const BranchingNetwork& net,
                                         const InitialClassification& cls,
                                         const FrozenCoefficients& frozen,
                                         std::span<const double> x, std::span<const double> t_grid,
                                         int j, double p, std::size_t n_paths, std::uint64_t seed,
                                         int n_steps) {
  if (j < 1 || j > net.dim() || !cls.in_NR(j))
    throw NotInNR("inverse_moment_probe: vertex " + std::to_string(j) + " is not in N_R");
  for (int i : net.catalysts_of(j))
    if (!(frozen.b0[i - 1] > 0.0))
      throw PreconditionViolated("inverse_moment_probe: b0 of catalyst " + std::to_string(i) +
                                 " is not positive");
  if (!(p > 0.0)) throw InvalidArgument("inverse_moment_probe: p must be positive");
  if (t_grid.empty()) throw InvalidArgument("inverse_moment_probe: empty t grid");
  InverseMomentReport rep;
  rep.j = j;
  rep.p = p;
  rep.x.assign(x.begin(), x.end());
  const auto r = static_cast<std::size_t>(
      std::lower_bound(cls.N_R.begin(), cls.N_R.end(), j) - cls.N_R.begin());
  std::vector<double> lt, lv, ls;
  double cmin = INFINITY, cmax = 0.0;
  for (double t : t_grid) {
    const auto sk = Skeleton::uniform(t, n_steps);
    const auto ens =
        CatalystEnsemble::sample(net, cls, frozen, x, sk, CatalystConfig{n_paths, seed, 1.0, 0.0});
    std::vector<double> v(n_paths);
    for (std::size_t q = 0; q < n_paths; ++q) v[q] = std::pow(ens.catalyst_integral(q, 1, r), -p);
    InverseMomentRow row;
    row.t = t;
    row.cap = empirical_quantile(v, 1.0 - 1e-6);
    for (double& e : v)
      if (e > row.cap) {
        e = row.cap;
        ++row.n_capped;
      }
    row.estimate = estimate(v);
    double m = INFINITY;
    for (int i : net.catalysts_of(j)) m = std::min(m, std::pow(t + x[i - 1], -p));
    row.bound_shape = std::pow(t, -p) * m;
    row.fitted_constant = row.estimate.mean / row.bound_shape;
    cmin = std::min(cmin, row.fitted_constant);
    cmax = std::max(cmax, row.fitted_constant);
    lt.push_back(std::log(t));
    lv.push_back(std::log(row.estimate.mean));
    ls.push_back(row.estimate.std_err / row.estimate.mean);
    rep.rows.push_back(row);
  }
  rep.constant_spread = cmax / cmin;
  if (lt.size() >= 2) {
    const bool weighted = std::all_of(ls.begin(), ls.end(), [](double s) { return s > 0.0; });
    rep.loglog = weighted ? fit_line(lt, lv, ls) : fit_line(lt, lv);
  }
  return rep;
}

json DerivativeReport::to_json() const {
  json r = json::array(), s = json::array();
  for (const auto& row : rows)
    r.push_back(json{{"vertex", row.vertex},
                     {"t", row.t},
                     {"step", row.step},
                     {"first", row.first},
                     {"scaled_second", row.scaled_second}});
  for (const auto& sl : slopes)
    s.push_back(json{{"vertex", sl.vertex},
                     {"first_loglog", line_json(sl.first_loglog)},
                     {"n_fit", sl.n_fit},
                     {"expected_first_slope", sl.expected_first_slope},
                     {"sup_t_scaled_second", sl.sup_t_scaled_second}});
  return json{{"rows", r}, {"slopes", s}};
}

DerivativeReport derivative_scaling_probe(const BranchingNetwork& net,
                                          const InitialClassification& cls,
                                          const FrozenCoefficients& frozen, const Observable& f,
                                          std::span<const double> x,
                                          std::span<const double> t_grid, double fd_step,
                                          std::size_t n_paths, std::uint64_t seed,
                                          int steps_per_node) {
  if (!(fd_step > 0.0)) throw InvalidArgument("derivative_scaling_probe: fd_step must be positive");
  const int d = net.dim();
  const auto sk = Skeleton::with_nodes(t_grid, steps_per_node);
  const std::size_t nn = sk.n_nodes();
  DerivativeReport rep;
  const VertexSet nc2 = cls.NC2();
  std::vector<double> xs(x.begin(), x.end());

  for (int v = 1; v <= d; ++v) {
    const double h = std::max(fd_step, fd_step * std::abs(x[v - 1]));
    DerivativeSlope slope;
    slope.vertex = v;
    std::vector<double> lt, lv, ls;
    if (cls.in_NR(v)) {
      const auto ens = CatalystEnsemble::sample(net, cls, frozen, x, sk,
                                                CatalystConfig{n_paths, seed, 1.0, 0.0});
      const double weight = net.catalyst_mass(v, x);
      bool all_zero = true;
      for (int i : net.catalysts_of(v)) all_zero = all_zero && x[i - 1] == 0.0;
      slope.expected_first_slope = all_zero ? -1.0 : -0.5;
      for (std::size_t k = 1; k < nn; ++k) {
        xs[v - 1] = x[v - 1] + h;
        const auto gp = ens.g_values(f, k, xs);
        xs[v - 1] = x[v - 1] - h;
        const auto gm = ens.g_values(f, k, xs);
        xs[v - 1] = x[v - 1];
        const auto g0 = ens.g_values(f, k, xs);
        std::vector<double> d1(n_paths), d2(n_paths);
        for (std::size_t p = 0; p < n_paths; ++p) {
          d1[p] = (gp[p] - gm[p]) / (2.0 * h);
          d2[p] = weight * (gp[p] - 2.0 * g0[p] + gm[p]) / (h * h);
        }
        rep.rows.push_back(DerivativeRow{v, ens.node_time(k), h, estimate(d1), estimate(d2)});
      }
    } else {
      const auto c = static_cast<int>(std::lower_bound(nc2.begin(), nc2.end(), v) - nc2.begin());
      const auto ens = CatalystEnsemble::sample(net, cls, frozen, x, sk,
                                                CatalystConfig{n_paths, seed, 1.0, h});
      slope.expected_first_slope = x[v - 1] == 0.0 ? -1.0 : -0.5;
      for (std::size_t k = 1; k < nn; ++k) {
        const auto g0 = ens.g_values(f, k, x);
        const auto g1 = ens.g_values(f, k, x, c, 1u);
        const auto g2 = ens.g_values(f, k, x, c, 2u);
        const auto g12 = ens.g_values(f, k, x, c, 3u);
        std::vector<double> d1(n_paths), d2(n_paths);
        for (std::size_t p = 0; p < n_paths; ++p) {
          const double f1 = 0.5 * (g1[p] + g2[p]);
          d1[p] = (-3.0 * g0[p] + 4.0 * f1 - g12[p]) / (2.0 * h);
          d2[p] = x[v - 1] * (g0[p] - g1[p] - g2[p] + g12[p]) / (h * h);
        }
        rep.rows.push_back(DerivativeRow{v, ens.node_time(k), h, estimate(d1), estimate(d2)});
      }
    }
    for (const auto& row : rep.rows) {
      if (row.vertex != v) continue;
      slope.sup_t_scaled_second =
          std::max(slope.sup_t_scaled_second, row.t * std::abs(row.scaled_second.mean));
      const double m = std::abs(row.first.mean);
      if (m > 2.0 * row.first.std_err && m > 0.0) {
        lt.push_back(std::log(row.t));
        lv.push_back(std::log(m));
        ls.push_back(std::max(row.first.std_err / m, 1e-12));
      }
    }
    slope.n_fit = lt.size();
    if (lt.size() >= 2) slope.first_loglog = fit_line(lt, lv, ls);
    rep.slopes.push_back(slope);
  }
  return rep;
}

}  // namespace catnet
