#include "catnet/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

#include "catnet/errors.hpp"
#include "catnet/rng.hpp"
#include "catnet/sde.hpp"

namespace catnet {

using nlohmann::json;

void ResolventConfig::validate() const {
  if (!(t_min > 0.0) || !(ratio > 1.0) || !(t_max_factor > 0.0) || substeps < 1 || n_paths < 2)
    throw InvalidArgument("resolvent config: need t_min > 0, ratio > 1, t_max_factor > 0, "
                          "substeps >= 1, n_paths >= 2");
  if (!(fd_step_nr > 0.0) || !(fd_step_nc2 > 0.0))
    throw InvalidArgument("resolvent config: finite-difference steps must be positive");
}

json ResolventEstimate::to_json() const {
  return json{{"value", value}, {"quad_error", quad_error}, {"tail", tail}, {"budget", budget}};
}

namespace {

struct Weighted {
  std::vector<double> full, half;
  double endpoint_error = 0.0;
  double tail = 0.0;
};

// Log-trapezoid weights on the node prefix that reaches t_max_factor / lambda
// with an even number of intervals; node 0 (t = 0) carries the endpoint term.
Weighted weigh_paths(const CatalystEnsemble& ens, std::span<const double> q, double lambda,
                     double sup_bound, const ResolventConfig& cfg) {
  if (!(lambda > 0.0)) throw InvalidArgument("resolvent: lambda must be positive");
  const std::size_t nn = ens.n_nodes(), np = ens.n_paths();
  if (q.size() != nn * np) throw DimensionMismatch("resolvent: node value matrix size");
  const double t_max = cfg.t_max_factor / lambda;
  std::size_t K = 0;
  for (std::size_t k = 1; k < nn; ++k)
    if (ens.node_time(k) >= t_max && (k - 1) % 2 == 0) {
      K = k;
      break;
    }
  if (K == 0) throw InvalidArgument("resolvent: path grid too short for this lambda");
  const double du = std::log(cfg.ratio);
  const double t1 = ens.node_time(1);
  const double e0 = -std::expm1(-lambda * t1) / lambda;
  std::vector<double> wf(K + 1, 0.0), wh(K + 1, 0.0);
  for (std::size_t k = 1; k <= K; ++k) {
    const double t = ens.node_time(k);
    const double base = t * std::exp(-lambda * t);
    wf[k] = du * base * ((k == 1 || k == K) ? 0.5 : 1.0);
    if ((k - 1) % 2 == 0) wh[k] = 2.0 * du * base * ((k == 1 || k == K) ? 0.5 : 1.0);
  }
  Weighted w;
  w.full.assign(np, 0.0);
  w.half.assign(np, 0.0);
  double m0 = 0.0, m1 = 0.0, mK = 0.0;
  for (std::size_t p = 0; p < np; ++p) {
    const double* row = q.data() + p * nn;
    double a = e0 * row[0], b = e0 * row[0];
    for (std::size_t k = 1; k <= K; ++k) {
      a += wf[k] * row[k];
      b += wh[k] * row[k];
    }
    w.full[p] = a;
    w.half[p] = b;
    m0 += row[0];
    m1 += row[1];
    mK += row[K];
  }
  const double inv = 1.0 / static_cast<double>(np);
  w.endpoint_error = e0 * std::abs(m1 - m0) * inv;
  const double decay = std::exp(-lambda * ens.node_time(K)) / lambda;
  // Unbounded observables: twice the last node value stands in for the sup.
  w.tail = std::isfinite(sup_bound) ? sup_bound * decay : 2.0 * std::abs(mK * inv) * decay;
  return w;
}

ResolventEstimate finish(const Weighted& w) {
  ResolventEstimate r;
  r.value = estimate(w.full);
  const Estimate h = estimate(w.half);
  r.quad_error = std::abs(r.value.mean - h.mean) + w.endpoint_error;
  r.tail = w.tail;
  r.budget = r.quad_error + r.value.std_err + r.tail;
  return r;
}


std::map<std::vector<double>, std::vector<std::size_t>> group_by_nc2(
    const InitialClassification& cls, const std::vector<std::vector<double>>& pts) {
  std::map<std::vector<double>, std::vector<std::size_t>> groups;
  const VertexSet nc2 = cls.NC2();
  for (std::size_t q = 0; q < pts.size(); ++q) {
    std::vector<double> key;
    for (int v : nc2) key.push_back(pts[q][v - 1]);
    groups[key].push_back(q);
  }
  return groups;
}

}  // namespace

ResolventPaths::ResolventPaths(const BranchingNetwork& net, const InitialClassification& cls,
                               const FrozenCoefficients& frozen, std::span<const double> x,
                               double lambda_min, const ResolventConfig& cfg, std::uint64_t seed,
                               bool with_extras)
    : net_(&net), cls_(&cls), frozen_(&frozen), cfg_(cfg), x_(x.begin(), x.end()) {
  cfg.validate();
  if (!(lambda_min > 0.0)) throw InvalidArgument("resolvent: lambda must be positive");
  const double t_max = cfg.t_max_factor / lambda_min * cfg.ratio * cfg.ratio;
  const auto sk = Skeleton::geometric(cfg.t_min, cfg.ratio, t_max, cfg.substeps);
  ens_ = CatalystEnsemble::sample(net, cls, frozen, x, sk,
                                  CatalystConfig{cfg.n_paths, seed, 1.0,
                                                 with_extras ? cfg.fd_step_nc2 : 0.0});
}

ResolventEstimate ResolventPaths::weigh(std::span<const double> q, double lambda,
                                        double sup_bound) const {
  return finish(weigh_paths(ens_, q, lambda, sup_bound, cfg_));
}

std::vector<double> ResolventPaths::eval_point(std::span<const double> x_eval) const {
  if (x_eval.empty()) return x_;
  if (x_eval.size() != x_.size()) throw DimensionMismatch("resolvent: evaluation point length");
  for (int v : ens_.nc2())
    if (x_eval[v - 1] != x_[v - 1])
      throw InvalidArgument("resolvent: evaluation point differs in an N_C2 coordinate");
  return {x_eval.begin(), x_eval.end()};
}

ResolventEstimate ResolventPaths::r_lambda(const Observable& g, double lambda,
                                           std::span<const double> x_eval) const {
  const std::vector<double> xe = eval_point(x_eval);
  const std::size_t nn = ens_.n_nodes(), np = ens_.n_paths();
  std::vector<double> q(nn * np);
  for (std::size_t k = 0; k < nn; ++k) {
    const auto v = ens_.g_values(g, k, xe);
    for (std::size_t p = 0; p < np; ++p) q[p * nn + k] = v[p];
  }
  return weigh(q, lambda, g.bound());
}

std::vector<double> ResolventPaths::b_node_values(const Observable& g,
                                                  const CoefficientField& tilde,
                                                  std::span<const double> x_eval) const {
  const std::vector<double> x = eval_point(x_eval);
  const BranchingNetwork& net = *net_;
  const int d = net.dim();
  const std::size_t nn = ens_.n_nodes(), np = ens_.n_paths();
  std::vector<double> q(nn * np, 0.0);
  std::vector<double> db(d), dg(d);
  for (int j = 1; j <= d; ++j) {
    db[j - 1] = tilde.eval_b(j, x) - frozen_->b0[j - 1];
    const double w = cls_->in_NR(j) ? net.catalyst_mass(j, x) : x[j - 1];
    dg[j - 1] = (tilde.eval_gamma(j, x) - frozen_->gamma0[j - 1]) * w;
  }
  const bool any = std::any_of(db.begin(), db.end(), [](double v) { return v != 0.0; }) ||
                   std::any_of(dg.begin(), dg.end(), [](double v) { return v != 0.0; });
  if (!any) return q;
  const VertexSet& nc2 = ens_.nc2();
  const bool extras = ens_.extra_h() > 0.0;
  for (std::size_t k = 0; k < nn; ++k) {
    const auto g0 = ens_.g_values(g, k, x);
    std::vector<double> acc(np, 0.0);
    std::vector<double> xs = x;
    for (int j : cls_->N_R) {
      if (db[j - 1] == 0.0 && dg[j - 1] == 0.0) continue;
      const double h = cfg_.fd_step_nr;
      xs[j - 1] = x[j - 1] + h;
      const auto gp = ens_.g_values(g, k, xs);
      xs[j - 1] = x[j - 1] - h;
      const auto gm = ens_.g_values(g, k, xs);
      xs[j - 1] = x[j - 1];
      for (std::size_t p = 0; p < np; ++p)
        acc[p] += db[j - 1] * (gp[p] - gm[p]) / (2.0 * h) +
                  dg[j - 1] * (gp[p] - 2.0 * g0[p] + gm[p]) / (h * h);
    }
    for (std::size_t c = 0; c < nc2.size(); ++c) {
      const int i = nc2[c];
      if (db[i - 1] == 0.0 && dg[i - 1] == 0.0) continue;
      if (!extras) throw InvalidArgument("resolvent: B needs paths sampled with extras");
      const double h = ens_.extra_h();
      const auto g1 = ens_.g_values(g, k, x, static_cast<int>(c), 1u);
      const auto g2 = ens_.g_values(g, k, x, static_cast<int>(c), 2u);
      const auto g12 = ens_.g_values(g, k, x, static_cast<int>(c), 3u);
      for (std::size_t p = 0; p < np; ++p) {
        const double d1 = (-3.0 * g0[p] + 2.0 * (g1[p] + g2[p]) - g12[p]) / (2.0 * h);
        const double d2 = (g0[p] - g1[p] - g2[p] + g12[p]) / (h * h);
        acc[p] += db[i - 1] * d1 + dg[i - 1] * d2;
      }
    }
    for (std::size_t p = 0; p < np; ++p) q[p * nn + k] = acc[p];
  }
  return q;
}

ResolventEstimate ResolventPaths::b_r_lambda(const Observable& g, const CoefficientField& tilde,
                                             double lambda, std::span<const double> x_eval) const {
  const auto q = b_node_values(g, tilde, x_eval);
  return weigh(q, lambda, INFINITY);
}

ResolventEstimate r_lambda(const Observable& f, const BranchingNetwork& net,
                           const InitialClassification& cls, const FrozenCoefficients& frozen,
                           std::span<const double> x, double lambda, const ResolventConfig& cfg,
                           std::uint64_t seed) {
  const ResolventPaths paths(net, cls, frozen, x, lambda, cfg, seed, false);
  return paths.r_lambda(f, lambda);
}

double apply_B(const CoefficientField& tilde, const FrozenCoefficients& frozen,
               const BranchingNetwork& net, const InitialClassification& cls,
               const PointFunction& g, std::span<const double> x, double fd_step) {
  const int d = net.dim();
  if (static_cast<int>(x.size()) != d) throw DimensionMismatch("apply_B: point length");
  if (!in_S0(cls, x)) throw StencilOutOfDomain("apply_B: point outside S0");
  if (!(fd_step > 0.0)) throw InvalidArgument("apply_B: fd_step must be positive");
  std::vector<double> xs(x.begin(), x.end());
  const double g0 = g(xs);
  double out = 0.0;
  for (int j = 1; j <= d; ++j) {
    const double db = tilde.eval_b(j, x) - frozen.b0[j - 1];
    const double w = cls.in_NR(j) ? net.catalyst_mass(j, x) : x[j - 1];
    const double dg = (tilde.eval_gamma(j, x) - frozen.gamma0[j - 1]) * w;
    if (db == 0.0 && dg == 0.0) continue;
    const double h = fd_step;
    const double xj = x[j - 1];
    double d1, d2;
    if (cls.in_NR(j) || xj >= h) {
      xs[j - 1] = xj + h;
      const double gp = g(xs);
      xs[j - 1] = xj - h;
      const double gm = g(xs);
      d1 = (gp - gm) / (2.0 * h);
      d2 = (gp - 2.0 * g0 + gm) / (h * h);
    } else {
      xs[j - 1] = xj + h;
      const double g1 = g(xs);
      xs[j - 1] = xj + 2.0 * h;
      const double g2 = g(xs);
      xs[j - 1] = xj + 3.0 * h;
      const double g3 = g(xs);
      d1 = (-3.0 * g0 + 4.0 * g1 - g2) / (2.0 * h);
      d2 = (2.0 * g0 - 5.0 * g1 + 4.0 * g2 - g3) / (h * h);
    }
    xs[j - 1] = xj;
    out += db * d1 + dg * d2;
  }
  return out;
}

json KeyEstimateReport::to_json() const {
  json arr = json::array();
  for (const auto& r : rows)
    arr.push_back(json{{"lambda", r.lambda},
                       {"ratio", r.ratio},
                       {"budget", r.budget},
                       {"argmax_x", r.argmax_x}});
  return json{{"function", function}, {"f_norm", f_norm},
              {"epsilon", epsilon},   {"rows", arr},
              {"nonincreasing", nonincreasing}, {"lambda1", lambda1},
              {"pass", pass}};
}

std::vector<KeyEstimateReport> key_estimate_probe(
    std::span<const TestFunction> fs, const CoefficientField& tilde, const BranchingNetwork& net,
    const InitialClassification& cls, const FrozenCoefficients& frozen,
    const std::vector<std::vector<double>>& x_grid, std::span<const double> lambdas,
    const ResolventConfig& cfg, std::uint64_t seed, double eps_max) {
  if (x_grid.empty() || lambdas.empty()) throw EmptyGrid("key_estimate_probe: empty grid");
  const double eps = perturbation_size(tilde, frozen, x_grid);
  if (eps > eps_max)
    throw PreconditionViolated("key_estimate_probe: perturbation size " + std::to_string(eps) +
                               " exceeds " + std::to_string(eps_max));
  std::vector<double> lam(lambdas.begin(), lambdas.end());
  std::sort(lam.begin(), lam.end());
  std::vector<KeyEstimateReport> reps(fs.size());
  // best[f][l] = (|value|, budget, std_err, point)
  struct Best {
    double v = -1.0, budget = 0.0, se = 0.0;
    std::size_t q = 0;
  };
  std::vector<std::vector<Best>> best(fs.size(), std::vector<Best>(lam.size()));
  for (std::size_t q = 0; q < x_grid.size(); ++q) {
    const ResolventPaths paths(net, cls, frozen, x_grid[q], lam.front(), cfg, seed, true);
    for (std::size_t fi = 0; fi < fs.size(); ++fi) {
      const auto q_nodes = paths.b_node_values(fs[fi], tilde);
      for (std::size_t l = 0; l < lam.size(); ++l) {
        const auto e = paths.weigh(q_nodes, lam[l], INFINITY);
        const double v = std::abs(e.value.mean);
        if (v > best[fi][l].v) best[fi][l] = Best{v, e.budget, e.value.std_err, q};
      }
    }
  }
  for (std::size_t fi = 0; fi < fs.size(); ++fi) {
    auto& r = reps[fi];
    r.function = fs[fi].name();
    r.f_norm = fs[fi].bound();
    r.epsilon = eps;
    r.nonincreasing = true;
    for (std::size_t l = 0; l < lam.size(); ++l) {
      const auto& b = best[fi][l];
      r.rows.push_back(KeyEstimateRow{lam[l], b.v / r.f_norm, b.budget / r.f_norm, x_grid[b.q]});
      if (l > 0) {
        const auto& a = best[fi][l - 1];
        const double allowed = (3.0 * std::hypot(a.se, b.se) + (a.budget - a.se) +
                                (b.budget - b.se)) / r.f_norm;
        if (r.rows[l].ratio > r.rows[l - 1].ratio + allowed) r.nonincreasing = false;
      }
      if (r.lambda1 == 0.0 && r.rows[l].ratio <= 0.5) r.lambda1 = lam[l];
    }
    r.pass = r.nonincreasing && r.rows.back().ratio <= 0.5;
  }
  return reps;
}

json SeriesResult::to_json() const {
  json t = json::array();
  for (const auto& e : terms) t.push_back(e.to_json());
  return json{{"lambda", lambda},
              {"g_norms", g_norms},
              {"ratios", ratios},
              {"terms", t},
              {"partial_sums", partial_sums},
              {"partial_sum_std_err", partial_sum_std_err},
              {"partial_sum_budget", partial_sum_budget},
              {"remainder_bound", remainder_bound}};
}

SeriesResult perturbation_series(const TestFunction& f, const CoefficientField& tilde,
                                 const BranchingNetwork& net, const InitialClassification& cls,
                                 const FrozenCoefficients& frozen, std::span<const double> x_probe,
                                 double lambda, int n_terms, const SeriesConfig& cfg,
                                 std::uint64_t seed) {
  if (n_terms < 3) throw InvalidArgument("perturbation_series: n_terms must be at least 3");
  const auto pts = tensor_grid(cfg.axes);
  for (const auto& x : pts)
    if (!in_S0(cls, x)) throw InvalidArgument("perturbation_series: grid point outside S0");
  const auto groups = group_by_nc2(cls, pts);

  std::vector<std::unique_ptr<ResolventPaths>> paths;
  std::vector<std::size_t> owner(pts.size());
  for (const auto& [key, members] : groups) {
    paths.push_back(std::make_unique<ResolventPaths>(net, cls, frozen, pts[members.front()],
                                                     lambda, cfg.resolvent, seed, true));
    for (std::size_t q : members) owner[q] = paths.size() - 1;
  }

  SeriesResult res;
  res.lambda = lambda;
  std::vector<std::shared_ptr<const Observable>> g;
  g.push_back(std::make_shared<TestFunction>(f));
  double n0 = 0.0;
  for (const auto& x : pts) n0 = std::max(n0, std::abs(f.value(x)));
  res.g_norms.push_back(n0);
  int over = 0;
  for (int n = 0; n <= n_terms; ++n) {
    std::vector<double> vals(pts.size());
    for (std::size_t q = 0; q < pts.size(); ++q) {
      vals[q] = paths[owner[q]]->b_r_lambda(*g.back(), tilde, lambda, pts[q]).value.mean;
    }
    auto next = std::make_shared<TensorBumpSum>(
        TensorBumpSum::interpolate(cfg.axes, vals, cfg.rbf_shape));
    double nn = 0.0;
    for (double v : vals) nn = std::max(nn, std::abs(v));
    const double ratio = res.g_norms.back() > 0.0 ? nn / res.g_norms.back() : 0.0;
    res.g_norms.push_back(nn);
    res.ratios.push_back(ratio);
    g.push_back(std::move(next));
    over = ratio > 1.0 ? over + 1 : 0;
    if (over >= 2)
      throw Divergence("perturbation_series: two consecutive ratios above 1 at n = " +
                       std::to_string(n));
  }

  ResolventConfig probe_cfg = cfg.resolvent;
  probe_cfg.n_paths = cfg.probe_paths;
  const ResolventPaths probe(net, cls, frozen, x_probe, lambda, probe_cfg, seed ^ 0x5eedull,
                             false);
  const auto& ens = probe.ensemble();
  const std::size_t nn = ens.n_nodes(), np = ens.n_paths();
  std::vector<double> qsum(nn * np, 0.0);
  double sum = 0.0, budget = 0.0;
  for (int n = 0; n < n_terms; ++n) {
    std::vector<double> q(nn * np);
    for (std::size_t k = 0; k < nn; ++k) {
      const auto v = ens.g_values(*g[n], k, x_probe);
      for (std::size_t p = 0; p < np; ++p) q[p * nn + k] = v[p];
    }
    const double sup = n == 0 ? f.bound() : res.g_norms[n];
    const auto e = probe.weigh(q, lambda, sup);
    for (std::size_t i = 0; i < q.size(); ++i) qsum[i] += q[i];
    sum += e.value.mean;
    budget += e.quad_error + e.tail;
    res.terms.push_back(e);
    res.partial_sums.push_back(sum);
  }
  const auto total = probe.weigh(qsum, lambda, INFINITY);
  res.partial_sum_std_err = total.value.std_err;
  const double r = res.ratios.back();
  res.remainder_bound = r < 1.0 ? res.g_norms[n_terms] / (lambda * (1.0 - r)) : INFINITY;
  res.partial_sum_budget = budget + res.remainder_bound;
  return res;
}

json DirectOracleResult::to_json() const {
  return json{{"fine", fine},
              {"fine_minus_coarse", fine_minus_coarse},
              {"tail", tail},
              {"discretization_allowance", discretization_allowance}};
}

DirectOracleResult direct_resolvent_oracle(const Observable& f, const CoefficientField& tilde,
                                           const BranchingNetwork& net,
                                           const InitialClassification& cls,
                                           std::span<const double> x, double lambda,
                                           const DirectOracleConfig& cfg, std::uint64_t seed) {
  if (!(lambda > 0.0) || !(cfg.dt > 0.0) || !(cfg.horizon_factor > 0.0) || cfg.n_paths < 2)
    throw InvalidArgument("direct oracle: bad configuration");
  const int d = net.dim();
  if (static_cast<int>(x.size()) != d) throw DimensionMismatch("direct oracle: point length");
  const double H = cfg.horizon_factor / lambda;
  int n = static_cast<int>(std::ceil(H / cfg.dt));
  if (n % 2) ++n;
  const double dt = cfg.dt;
  std::vector<double> fine(cfg.n_paths), coarse(cfg.n_paths);
  parallel_for(cfg.n_paths, [&](std::size_t p) {
    Philox4x32 rng(seed, p, 0);
    std::vector<double> xf(x.begin(), x.end()), xc(x.begin(), x.end());
    std::vector<double> z1(d), z2(d);
    double sf = 0.5 * dt * f.value(xf), sc = dt * f.value(xc);
    auto step = [&](std::vector<double>& s, double h, const std::vector<double>& z) {
      const DriftDiffusion dd = drift_diffusion_reference(net, cls, tilde, s);
      const double sh = std::sqrt(h);
      for (int c = 0; c < d; ++c) {
        const double v = s[c] + dd.drift[c] * h + std::sqrt(dd.diffusion_sq[c]) * sh * z[c];
        s[c] = cls.in_NR(c + 1) ? v : std::max(0.0, v);
      }
    };
    std::vector<double> zc(d);
    for (int k = 0; k < n; k += 2) {
      for (int c = 0; c < d; ++c) z1[c] = rng.normal();
      for (int c = 0; c < d; ++c) z2[c] = rng.normal();
      step(xf, dt, z1);
      const double w1 = std::exp(-lambda * (k + 1) * dt);
      sf += dt * w1 * f.value(xf);
      step(xf, dt, z2);
      const double w2 = std::exp(-lambda * (k + 2) * dt);
      sf += (k + 2 == n ? 0.5 : 1.0) * dt * w2 * f.value(xf);
      for (int c = 0; c < d; ++c) zc[c] = (z1[c] + z2[c]) / std::sqrt(2.0);
      step(xc, 2.0 * dt, zc);
      sc += (k + 2 == n ? 1.0 : 2.0) * dt * w2 * f.value(xc);
    }
    fine[p] = sf;
    coarse[p] = sc;
  });
  DirectOracleResult r;
  r.fine = estimate(fine);
  r.fine_minus_coarse = paired_difference(fine, coarse);
  const double b = f.bound();
  r.tail = (std::isfinite(b) ? b : 0.0) * std::exp(-lambda * n * dt) / lambda;
  r.discretization_allowance =
      std::abs(r.fine_minus_coarse.mean) + 2.0 * r.fine_minus_coarse.std_err + r.tail;
  return r;
}

json IdentityReport::to_json() const {
  return json{{"lambda", lambda},
              {"mu", mu},
              {"r_lambda", r_lambda.to_json()},
              {"r_mu", r_mu.to_json()},
              {"nested", nested.to_json()},
              {"lhs", lhs},
              {"rhs", rhs},
              {"interpolation_error", interpolation_error},
              {"budget", budget},
              {"pass", pass}};
}

IdentityReport resolvent_identity_check(const TestFunction& f, const BranchingNetwork& net,
                                        const InitialClassification& cls,
                                        const FrozenCoefficients& frozen,
                                        std::span<const double> x, double lambda, double mu,
                                        const std::vector<std::vector<double>>& axes,
                                        const ResolventConfig& cfg, std::uint64_t seed) {
  IdentityReport rep;
  rep.lambda = lambda;
  rep.mu = mu;
  if (lambda == mu) {
    rep.pass = true;
    return rep;
  }
  const double lmin = std::min(lambda, mu);
  const auto pts = tensor_grid(axes);
  std::vector<double> inner(pts.size());
  for (const auto& [key, members] : group_by_nc2(cls, pts)) {
    const ResolventPaths rp(net, cls, frozen, pts[members.front()], mu, cfg, seed, false);
    for (std::size_t q : members) inner[q] = rp.r_lambda(f, mu, pts[q]).value.mean;
  }
  // Interpolate around the node mean so constants are exact and paths that
  // leave the grid box see the mean rather than a decaying RBF tail.
  double centre = 0.0;
  for (double v : inner) centre += v / static_cast<double>(inner.size());
  std::vector<double> offset(inner.size());
  for (std::size_t q = 0; q < inner.size(); ++q) offset[q] = inner[q] - centre;
  ObservableSum h;
  h.add(1.0, std::make_shared<TensorBumpSum>(TensorBumpSum::interpolate(axes, offset)));
  h.add(centre, std::make_shared<TestFunction>(TestFunction::constant(cls.dim(), 1.0)));

  // Interpolation error at cell centres of the first two cells per axis and
  // half a cell beyond the last node, where the outer paths also go.
  std::vector<std::vector<double>> mid_axes;
  for (const auto& a : axes) {
    std::vector<double> m;
    for (std::size_t i = 0; i + 1 < a.size() && i < 2; ++i) m.push_back(0.5 * (a[i] + a[i + 1]));
    if (a.size() > 1) m.push_back(a.back() + 0.5 * (a.back() - a[a.size() - 2]));
    if (m.empty()) m.push_back(a.front());
    mid_axes.push_back(m);
  }
  const auto mids = tensor_grid(mid_axes);
  for (const auto& [key, members] : group_by_nc2(cls, mids)) {
    const ResolventPaths rp(net, cls, frozen, mids[members.front()], mu, cfg, seed + 1, false);
    for (std::size_t q : members) {
      const auto e = rp.r_lambda(f, mu, mids[q]);
      rep.interpolation_error = std::max(
          rep.interpolation_error, std::abs(e.value.mean - h.value(mids[q])) + 2.0 * e.value.std_err + e.budget);
    }
  }

  const ResolventPaths outer(net, cls, frozen, x, lmin, cfg, seed + 2, false);
  const auto& ens = outer.ensemble();
  const std::size_t nn = ens.n_nodes(), np = ens.n_paths();
  std::vector<double> qf(nn * np), qh(nn * np);
  for (std::size_t k = 0; k < nn; ++k) {
    const auto a = ens.g_values(f, k, x);
    const auto b = ens.g_values(h, k, x);
    for (std::size_t p = 0; p < np; ++p) {
      qf[p * nn + k] = a[p];
      qh[p * nn + k] = b[p];
    }
  }
  const auto wl = weigh_paths(ens, qf, lambda, f.bound(), cfg);
  const auto wm = weigh_paths(ens, qf, mu, f.bound(), cfg);
  const auto wn = weigh_paths(ens, qh, lambda, INFINITY, cfg);
  rep.r_lambda = finish(wl);
  rep.r_mu = finish(wm);
  rep.nested = finish(wn);
  rep.lhs = rep.r_lambda.value.mean - rep.r_mu.value.mean;
  rep.rhs = (mu - lambda) * rep.nested.value.mean;
  std::vector<double> diff(np);
  for (std::size_t p = 0; p < np; ++p)
    diff[p] = wl.full[p] - wm.full[p] - (mu - lambda) * wn.full[p];
  const Estimate de = estimate(diff);
  const double scale = std::abs(mu - lambda);
  rep.budget = 3.0 * de.std_err + rep.r_lambda.quad_error + rep.r_lambda.tail +
               rep.r_mu.quad_error + rep.r_mu.tail +
               scale * (rep.nested.quad_error + rep.nested.tail + rep.interpolation_error / lambda);
  rep.pass = std::abs(rep.lhs - rep.rhs) <= rep.budget;
  return rep;
}

}  // namespace catnet
