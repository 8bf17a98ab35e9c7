#include "catnet/sde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "catnet/errors.hpp"
#include "catnet/feller.hpp"
#include "catnet/stats.hpp"

namespace catnet {

using nlohmann::json;

DriftDiffusion drift_diffusion(const BranchingNetwork& net, const CoefficientField& field,
                               std::span<const double> x) {
  const int d = net.dim();
  if (static_cast<int>(x.size()) != d || field.dim() != d)
    throw DimensionMismatch("drift_diffusion: dimensions differ");
  DriftDiffusion dd;
  dd.drift.resize(d);
  dd.diffusion_sq.resize(d);
  for (int j = 1; j <= d; ++j) {
    dd.drift[j - 1] = field.eval_b(j, x);
    const double g = field.eval_gamma(j, x);
    const double mass = net.is_reactant(j) ? net.catalyst_mass(j, x) : 1.0;
    dd.diffusion_sq[j - 1] = std::max(0.0, 2.0 * g * mass * x[j - 1]);
  }
  return dd;
}

DriftDiffusion drift_diffusion_reference(const BranchingNetwork& net,
                                         const InitialClassification& cls,
                                         const CoefficientField& field,
                                         std::span<const double> x) {
  const int d = net.dim();
  if (static_cast<int>(x.size()) != d || field.dim() != d)
    throw DimensionMismatch("drift_diffusion_reference: dimensions differ");
  DriftDiffusion dd;
  dd.drift.resize(d);
  dd.diffusion_sq.resize(d);
  for (int j = 1; j <= d; ++j) {
    dd.drift[j - 1] = field.eval_b(j, x);
    const double g = field.eval_gamma(j, x);
    const double w = cls.in_NR(j) ? net.catalyst_mass(j, x) : x[j - 1];
    dd.diffusion_sq[j - 1] = std::max(0.0, 2.0 * g * std::max(w, 0.0));
  }
  return dd;
}

int SimConfig::n_steps() const { return std::max(1, static_cast<int>(std::lround(T / dt))); }

void SimConfig::validate() const {
  if (!(dt > 0.0) || !(T > 0.0)) throw InvalidArgument("sim: dt and T must be positive");
  if (dt > T * (1.0 + 1e-12)) throw InvalidArgument("sim: dt must not exceed T");
  if (n_paths < 1) throw InvalidArgument("sim: n_paths must be at least 1");
  if (record_every < 0) throw InvalidArgument("sim: record_every must be nonnegative");
}

double s_product(const BranchingNetwork& net, std::span<const double> x) {
  double p = 1.0;
  for (int j : net.reactant_set()) p *= net.catalyst_mass(j, x) + x[j - 1];
  return p;
}

json PathEnsemble::summary() const {
  const std::size_t nt = n_times();
  json means = json::array(), errs = json::array();
  for (int c = 0; c < d; ++c) {
    Accumulator acc;
    for (std::size_t p = 0; p < n_paths; ++p) acc.add(knots[(p * nt + nt - 1) * d + c]);
    const Estimate e = acc.result();
    means.push_back(e.mean);
    errs.push_back(e.std_err);
  }
  // Histogram of log10 of the smallest S product per path.
  json hist = json::object();
  for (double v : min_S_product) {
    std::string bin;
    if (v <= 0.0)
      bin = "zero";
    else
      bin = "1e" + std::to_string(static_cast<int>(std::floor(std::log10(v))));
    hist[bin] = hist.value(bin, 0) + 1;
  }
  return json{{"n_paths", n_paths}, {"T", times.empty() ? 0.0 : times.back()},
              {"final_mean", means}, {"final_std_err", errs}, {"min_S_product_histogram", hist}};
}

namespace {

std::vector<double> record_times(const SimConfig& cfg) {
  const int n = cfg.n_steps();
  const double h = cfg.T / n;
  std::vector<double> t{0.0};
  if (cfg.record_every > 0)
    for (int k = cfg.record_every; k < n; k += cfg.record_every) t.push_back(k * h);
  t.push_back(cfg.T);
  return t;
}

bool records(const SimConfig& cfg, int step, int n) {
  return step == n || (cfg.record_every > 0 && step % cfg.record_every == 0);
}

double euclid(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace

PathEnsemble simulate(const SDESystem& sys, std::span<const double> x0, const SimConfig& cfg) {
  cfg.validate();
  const BranchingNetwork& net = sys.net;
  const int d = net.dim();
  if (static_cast<int>(x0.size()) != d || sys.field.dim() != d)
    throw DimensionMismatch("simulate: dimensions differ");
  if (!in_state_space(net, x0)) throw InvalidArgument("simulate: x0 lies outside S");

  PathEnsemble ens;
  ens.d = d;
  ens.n_paths = cfg.n_paths;
  ens.times = record_times(cfg);
  ens.integral_vertices = net.reactant_set();
  const std::size_t nt = ens.times.size();
  const std::size_t ni = ens.integral_vertices.size();
  ens.knots.assign(cfg.n_paths * nt * d, 0.0);
  ens.integrals.assign(cfg.n_paths * ni, 0.0);
  ens.min_S_product.assign(cfg.n_paths, 0.0);
  ens.min_knot.assign(cfg.n_paths, 0.0);

  const int n = cfg.n_steps();
  const double h = cfg.T / n;
  const double sh = std::sqrt(h);
  const double cap = cfg.blowup_factor * (1.0 + euclid(x0));

  parallel_for(cfg.n_paths, [&](std::size_t p) {
    Philox4x32 rng(cfg.seed, p);
    std::vector<double> x(x0.begin(), x0.end()), next(d);
    std::vector<double> mass(ni), mass_next(ni);
    for (std::size_t k = 0; k < ni; ++k) mass[k] = net.catalyst_mass(ens.integral_vertices[k], x);
    std::copy(x.begin(), x.end(), ens.knots.begin() + p * nt * d);
    double min_prod = s_product(net, x);
    double min_val = *std::min_element(x.begin(), x.end());
    std::size_t slot = 1;
    for (int step = 1; step <= n; ++step) {
      const DriftDiffusion dd = drift_diffusion(net, sys.field, x);
      for (int c = 0; c < d; ++c) {
        const double v = x[c] + dd.drift[c] * h + std::sqrt(dd.diffusion_sq[c]) * sh * rng.normal();
        next[c] = std::max(0.0, v);
        if (next[c] > cap)
          throw BlowUp("simulate: coordinate " + std::to_string(c + 1) + " exceeded " +
                       std::to_string(cap) + " on path " + std::to_string(p));
      }
      for (std::size_t k = 0; k < ni; ++k) {
        mass_next[k] = net.catalyst_mass(ens.integral_vertices[k], next);
        ens.integrals[p * ni + k] += 0.5 * h * (mass[k] + mass_next[k]);
      }
      x.swap(next);
      mass.swap(mass_next);
      min_prod = std::min(min_prod, s_product(net, x));
      min_val = std::min(min_val, *std::min_element(x.begin(), x.end()));
      if (records(cfg, step, n))
        std::copy(x.begin(), x.end(), ens.knots.begin() + (p * nt + slot++) * d);
    }
    ens.min_S_product[p] = min_prod;
    ens.min_knot[p] = min_val;
  });
  return ens;
}

namespace {

std::pair<PathEnsemble, PathEnsemble> simulate_A0_impl(const BranchingNetwork& net,
                                                       const InitialClassification& cls,
                                                       const FrozenCoefficients& frozen,
                                                       std::span<const double> x0,
                                                       const SimConfig& cfg, bool paired) {
  cfg.validate();
  const int d = net.dim();
  if (static_cast<int>(x0.size()) != d || cls.dim() != d)
    throw DimensionMismatch("simulate_A0: dimensions differ");
  if (!in_S0(cls, x0)) throw InvalidArgument("simulate_A0: x0 lies outside S0");
  check_frozen(frozen, net, cls);
  const int n = cfg.n_steps();
  if (paired && n % 2 != 0) throw InvalidArgument("simulate_A0_paired: need an even step count");

  const VertexSet nc2 = cls.NC2();
  const VertexSet& nr = cls.N_R;
  const std::size_t nnr = nr.size();

  auto make = [&](std::vector<double> times) {
    PathEnsemble e;
    e.d = d;
    e.n_paths = cfg.n_paths;
    e.times = std::move(times);
    e.integral_vertices = nr;
    e.knots.assign(cfg.n_paths * e.times.size() * d, 0.0);
    e.integrals.assign(cfg.n_paths * nnr, 0.0);
    e.min_S_product.assign(cfg.n_paths, 0.0);
    e.min_knot.assign(cfg.n_paths, 0.0);
    return e;
  };
  PathEnsemble fine = make(record_times(cfg));
  PathEnsemble coarse = make(paired ? std::vector<double>{0.0, cfg.T} : std::vector<double>{});
  const std::size_t nt = fine.times.size();
  const double h = cfg.T / n;

  parallel_for(cfg.n_paths, [&](std::size_t p) {
    Philox4x32 rng(cfg.seed, p);
    std::vector<double> x(x0.begin(), x0.end());
    std::vector<double> xc(x0.begin(), x0.end());  // coarse N_R state
    std::vector<double> mass(nnr), mass_next(nnr), mass_pair_start(nnr);
    std::vector<double> pair_num(nnr, 0.0), pair_var(nnr, 0.0);
    for (std::size_t k = 0; k < nnr; ++k) mass[k] = net.catalyst_mass(nr[k], x);
    mass_pair_start = mass;
    std::copy(x.begin(), x.end(), fine.knots.begin() + p * nt * d);
    double min_prod = s_product(net, x);
    double min_val = *std::min_element(x.begin(), x.end());
    std::size_t slot = 1;
    FellerParams fp;
    for (int step = 1; step <= n; ++step) {
      for (int i : nc2) {
        fp.x = x[i - 1];
        fp.b = frozen.b0[i - 1];
        fp.gamma = frozen.gamma0[i - 1];
        x[i - 1] = exact_transition_sample(fp, h, rng);
      }
      for (std::size_t k = 0; k < nnr; ++k) {
        const int j = nr[k];
        mass_next[k] = net.catalyst_mass(j, x);
        const double occ = 0.5 * h * (mass[k] + mass_next[k]);
        const double var = 2.0 * frozen.gamma0[j - 1] * occ;
        const double xi = rng.normal();
        x[j - 1] += frozen.b0[j - 1] * h + std::sqrt(var) * xi;
        fine.integrals[p * nnr + k] += occ;
        if (paired) {
          pair_num[k] += std::sqrt(var) * xi;
          pair_var[k] += var;
        }
      }
      if (paired && step % 2 == 0) {
        for (std::size_t k = 0; k < nnr; ++k) {
          const int j = nr[k];
          const double occ = h * (mass_pair_start[k] + mass_next[k]);
          const double var = 2.0 * frozen.gamma0[j - 1] * occ;
          const double z = pair_var[k] > 0.0 ? pair_num[k] / std::sqrt(pair_var[k]) : 0.0;
          xc[j - 1] += frozen.b0[j - 1] * 2.0 * h + std::sqrt(var) * z;
          coarse.integrals[p * nnr + k] += occ;
          pair_num[k] = pair_var[k] = 0.0;
          mass_pair_start[k] = mass_next[k];
        }
      }
      mass.swap(mass_next);
      if (!net.reactant_set().empty()) min_prod = std::min(min_prod, s_product(net, x));
      min_val = std::min(min_val, *std::min_element(x.begin(), x.end()));
      if (records(cfg, step, n))
        std::copy(x.begin(), x.end(), fine.knots.begin() + (p * nt + slot++) * d);
    }
    fine.min_S_product[p] = min_prod;
    fine.min_knot[p] = min_val;
    if (paired) {
      for (int i : nc2) xc[i - 1] = x[i - 1];
      std::copy(x0.begin(), x0.end(), coarse.knots.begin() + p * 2 * d);
      std::copy(xc.begin(), xc.end(), coarse.knots.begin() + (p * 2 + 1) * d);
      coarse.min_S_product[p] = std::numeric_limits<double>::quiet_NaN();
      coarse.min_knot[p] = std::numeric_limits<double>::quiet_NaN();
    }
  });
  return {std::move(fine), std::move(coarse)};
}

}  // namespace

PathEnsemble simulate_A0(const BranchingNetwork& net, const InitialClassification& cls,
                         const FrozenCoefficients& frozen, std::span<const double> x0,
                         const SimConfig& cfg) {
  return simulate_A0_impl(net, cls, frozen, x0, cfg, false).first;
}

std::pair<PathEnsemble, PathEnsemble> simulate_A0_paired(const BranchingNetwork& net,
                                                         const InitialClassification& cls,
                                                         const FrozenCoefficients& frozen,
                                                         std::span<const double> x0,
                                                         const SimConfig& cfg) {
  return simulate_A0_impl(net, cls, frozen, x0, cfg, true);
}

json MonitorReport::to_json() const {
  return json{{"threshold", threshold},         {"n_paths", n_paths},
              {"below_threshold", below_threshold}, {"exact_zero", exact_zero},
              {"negative_knots", negative_knots}, {"fraction_below", fraction_below},
              {"smallest", smallest}};
}

MonitorReport s_product_monitor(const PathEnsemble& ens, const BranchingNetwork& net,
                               double threshold) {
  (void)net;
  MonitorReport r;
  r.threshold = threshold;
  r.n_paths = ens.n_paths;
  r.smallest = INFINITY;
  for (std::size_t p = 0; p < ens.n_paths; ++p) {
    const double v = ens.min_S_product[p];
    r.smallest = std::min(r.smallest, v);
    if (v < threshold) ++r.below_threshold;
    if (v <= 0.0) ++r.exact_zero;
    if (ens.min_knot[p] < 0.0) ++r.negative_knots;
  }
  r.fraction_below = ens.n_paths ? static_cast<double>(r.below_threshold) / ens.n_paths : 0.0;
  return r;
}

void reference_euler_step(const BranchingNetwork& net, const InitialClassification& cls,
                          const CoefficientField& field, std::span<double> x, double dt,
                          Philox4x32& rng) {
  const DriftDiffusion dd = drift_diffusion_reference(net, cls, field, x);
  const double sh = std::sqrt(dt);
  const int d = net.dim();
  for (int c = 0; c < d; ++c) {
    const double v = x[c] + dd.drift[c] * dt + std::sqrt(dd.diffusion_sq[c]) * sh * rng.normal();
    x[c] = cls.in_NR(c + 1) ? v : std::max(0.0, v);
  }
}

}  // namespace catnet
