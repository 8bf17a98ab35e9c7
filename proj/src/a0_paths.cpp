#include "catnet/a0_paths.hpp"

#include <algorithm>
#include <cmath>

#include "catnet/errors.hpp"
#include "catnet/feller.hpp"
#include "catnet/rng.hpp"

namespace catnet {

Skeleton Skeleton::uniform(double T, int n_steps) {
  if (!(T > 0.0) || n_steps < 1) throw InvalidArgument("skeleton: need T > 0 and n_steps >= 1");
  Skeleton s;
  s.times.resize(n_steps + 1);
  for (int k = 0; k <= n_steps; ++k) s.times[k] = T * k / n_steps;
  s.times.back() = T;
  s.nodes = {0, static_cast<std::size_t>(n_steps)};
  return s;
}

Skeleton Skeleton::with_nodes(std::span<const double> node_times, int substeps) {
  if (node_times.empty() || substeps < 1)
    throw InvalidArgument("skeleton: need node times and substeps >= 1");
  Skeleton s;
  s.times.push_back(0.0);
  s.nodes.push_back(0);
  double prev = 0.0;
  for (double t : node_times) {
    if (!(t > prev)) throw InvalidArgument("skeleton: node times must increase from 0");
    for (int q = 1; q <= substeps; ++q)
      s.times.push_back(q == substeps ? t : prev + (t - prev) * q / substeps);
    s.nodes.push_back(s.times.size() - 1);
    prev = t;
  }
  return s;
}

Skeleton Skeleton::geometric(double t_min, double ratio, double t_max, int substeps) {
  if (!(t_min > 0.0) || !(ratio > 1.0) || !(t_max > t_min))
    throw InvalidArgument("skeleton: need 0 < t_min < t_max and ratio > 1");
  std::vector<double> nodes;
  for (int k = 0;; ++k) {
    nodes.push_back(t_min * std::pow(ratio, k));
    if (nodes.back() >= t_max) break;
  }
  return with_nodes(nodes, substeps);
}

CatalystEnsemble CatalystEnsemble::sample(const BranchingNetwork& net,
                                          const InitialClassification& cls,
                                          const FrozenCoefficients& frozen,
                                          std::span<const double> x, const Skeleton& skeleton,
                                          const CatalystConfig& cfg) {
  const int d = net.dim();
  if (static_cast<int>(x.size()) != d || cls.dim() != d ||
      static_cast<int>(frozen.b0.size()) != d)
    throw DimensionMismatch("catalyst ensemble: dimension mismatch");
  if (!in_S0(cls, x)) throw InvalidArgument("catalyst ensemble: start point outside S0");
  if (cfg.n_paths == 0) throw InvalidArgument("catalyst ensemble: n_paths must be positive");
  if (!(cfg.gamma_scale > 0.0) || !(cfg.extra_h >= 0.0))
    throw InvalidArgument("catalyst ensemble: bad gamma_scale or extra_h");

  CatalystEnsemble e;
  e.d_ = d;
  e.n_paths_ = cfg.n_paths;
  e.extra_h_ = cfg.extra_h;
  e.nc2_ = cls.NC2();
  e.nr_ = cls.N_R;
  for (std::size_t k : skeleton.nodes) e.node_times_.push_back(skeleton.times[k]);
  std::vector<int> pos(d + 1, -1);
  for (std::size_t c = 0; c < e.nc2_.size(); ++c) pos[e.nc2_[c]] = static_cast<int>(c);
  e.feeds_.resize(e.nc2_.size());
  for (std::size_t r = 0; r < e.nr_.size(); ++r) {
    const int j = e.nr_[r];
    e.b0_nr_.push_back(frozen.b0[j - 1]);
    e.g0_nr_.push_back(frozen.gamma0[j - 1]);
    std::vector<std::size_t> idx;
    for (int i : net.catalysts_of(j)) {
      if (pos[i] < 0) throw InvalidArgument("catalyst ensemble: catalyst of an N_R vertex in N_R");
      idx.push_back(static_cast<std::size_t>(pos[i]));
      e.feeds_[pos[i]].push_back(r);
    }
    e.cat_index_.push_back(std::move(idx));
  }

  const std::size_t nn = e.n_nodes(), nc = e.nc2_.size();
  const bool extras = cfg.extra_h > 0.0;
  e.z_.assign(cfg.n_paths * nn * nc, 0.0);
  e.occ_.assign(cfg.n_paths * nn * nc, 0.0);
  if (extras) {
    e.ez_.assign(cfg.n_paths * nn * nc * 2, 0.0);
    e.eocc_.assign(cfg.n_paths * nn * nc * 2, 0.0);
  }

  const auto& times = skeleton.times;
  const auto& nodes = skeleton.nodes;
  auto run = [&](std::size_t p, FellerParams fp, std::uint32_t substream, double* zout,
                 double* occout, std::size_t stride) {
    Philox4x32 rng(cfg.seed, p, substream);
    double v = fp.x, integral = 0.0;
    std::size_t next = 0;
    if (nodes[0] == 0) {
      zout[0] = v;
      occout[0] = 0.0;
      next = 1;
    }
    for (std::size_t s = 1; s < times.size() && next < nodes.size(); ++s) {
      const double h = times[s] - times[s - 1];
      fp.x = v;
      const double nv = exact_transition_sample(fp, h, rng);
      integral += 0.5 * h * (v + nv);
      v = nv;
      if (nodes[next] == s) {
        zout[next * stride] = v;
        occout[next * stride] = integral;
        ++next;
      }
    }
  };

  parallel_for(cfg.n_paths, [&](std::size_t p) {
    for (std::size_t c = 0; c < nc; ++c) {
      const int v = e.nc2_[c];
      const double g = frozen.gamma0[v - 1] * cfg.gamma_scale;
      const std::uint32_t sub = 4u * static_cast<std::uint32_t>(v);
      run(p, FellerParams{x[v - 1], frozen.b0[v - 1], g}, sub, &e.z_[(p * nn) * nc + c],
          &e.occ_[(p * nn) * nc + c], nc);
      if (extras)
        for (int q = 0; q < 2; ++q)
          run(p, FellerParams{cfg.extra_h, 0.0, g}, sub + 1 + q,
              &e.ez_[((p * nn) * nc + c) * 2 + q], &e.eocc_[((p * nn) * nc + c) * 2 + q], nc * 2);
    }
  });
  return e;
}

double CatalystEnsemble::catalyst_integral(std::size_t p, std::size_t k, std::size_t r) const {
  double s = 0.0;
  for (std::size_t c : cat_index_[r]) s += occupation(p, k, c);
  return s;
}

void CatalystEnsemble::g_inputs(std::size_t p, std::size_t k, std::span<const double> x,
                                std::span<double> mean, std::span<double> var, int shift_c,
                                unsigned mask) const {
  const double t = node_times_[k];
  double dz = 0.0, docc = 0.0;
  if (shift_c >= 0 && mask != 0) {
    if (ez_.empty()) throw InvalidArgument("catalyst ensemble: sampled without extras");
    for (int q = 0; q < 2; ++q)
      if (mask & (1u << q)) {
        dz += extra_z(p, k, static_cast<std::size_t>(shift_c), q);
        docc += extra_occupation(p, k, static_cast<std::size_t>(shift_c), q);
      }
  }
  for (std::size_t c = 0; c < nc2_.size(); ++c) {
    const int v = nc2_[c];
    mean[v - 1] = z(p, k, c) + (static_cast<int>(c) == shift_c ? dz : 0.0);
    var[v - 1] = 0.0;
  }
  for (std::size_t r = 0; r < nr_.size(); ++r) {
    const int j = nr_[r];
    double I = catalyst_integral(p, k, r);
    if (shift_c >= 0 && docc != 0.0)
      for (std::size_t c : cat_index_[r])
        if (static_cast<int>(c) == shift_c) I += docc;
    mean[j - 1] = x[j - 1] + b0_nr_[r] * t;
    var[j - 1] = 2.0 * g0_nr_[r] * I;
  }
}

std::vector<double> CatalystEnsemble::g_values(const Observable& f, std::size_t k,
                                               std::span<const double> x, int shift_c,
                                               unsigned mask, bool* fallback) const {
  if (f.dim() != d_ || static_cast<int>(x.size()) != d_)
    throw DimensionMismatch("catalyst ensemble: observable dimension");
  std::vector<double> out(n_paths_);
  std::vector<char> fb(n_paths_, 0);
  parallel_for(n_paths_, [&](std::size_t p) {
    thread_local std::vector<double> mean, var;
    mean.resize(d_);
    var.resize(d_);
    g_inputs(p, k, x, mean, var, shift_c, mask);
    bool used = false;
    out[p] = f.gauss_expect(mean, var, &used);
    fb[p] = used;
  });
  if (fallback && std::any_of(fb.begin(), fb.end(), [](char c) { return c != 0; }))
    *fallback = true;
  return out;
}

Estimate CatalystEnsemble::expect(const Observable& f, std::size_t k, std::span<const double> x,
                                  bool* fallback) const {
  const auto v = g_values(f, k, x, -1, 0, fallback);
  return estimate(v);
}

}  // namespace catnet
