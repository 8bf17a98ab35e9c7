#include "catnet/cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "catnet/errors.hpp"
#include "catnet/norms.hpp"
#include "catnet/resolvent.hpp"
#include "catnet/rng.hpp"
#include "catnet/sde.hpp"
#include "catnet/semigroup.hpp"
#include "catnet/verify.hpp"

namespace catnet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string wall_clock() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Writer {
 public:
  Writer(const RunConfig& cfg, std::string command)
      : dir_(cfg.output_dir), meta_(output_meta(cfg, command)), command_(std::move(command)) {
    fs::create_directories(dir_);
  }

  void json_file(const std::string& name, json body) const {
    body["meta"] = meta_;
    std::ofstream out(dir_ / name);
    out << body.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
  }

  void csv(const CsvTable& t) const {
    const fs::path p = dir_ / (command_ + "_" + t.name + ".csv");
    std::ofstream out(p);
    out << "# catnet " << meta_["version"].get<std::string>()
        << " config_hash=" << meta_["config_hash"].get<std::string>()
        << " seed=" << meta_["seed"].get<std::uint64_t>()
        << " wall_clock=" << meta_["wall_clock"].get<std::string>() << '\n'
        << t.render();
    if (!out) throw std::runtime_error("cannot write " + p.string());
  }

 private:
  fs::path dir_;
  json meta_;
  std::string command_;
};

std::string join(const VertexSet& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s;
}

int cmd_classify(const RunConfig& cfg, std::ostream& out) {
  const auto cls = classify_initial(cfg.net, cfg.x0);
  Writer w(cfg, "classify");
  w.json_file("classify.json", json{{"network", cfg.net.to_json()},
                                    {"classification", cls.to_json()},
                                    {"in_S", cls.in_S}});
  CsvTable t{"vertices", {"vertex", "role", "x0", "catalysts", "reactants", "rbar"}, {}};
  static const char* roles[] = {"N_R", "N_C", "N_2"};
  for (int v = 1; v <= cfg.net.dim(); ++v)
    t.add({std::to_string(v), roles[static_cast<int>(cls.role[v - 1])], fmt(cfg.x0[v - 1]),
           join(cfg.net.catalysts_of(v)), join(cfg.net.reactants_of(v)), join(cls.rbar(v))});
  w.csv(t);
  out << "N_R = [" << join(cls.N_R) << "], N_C = [" << join(cls.N_C) << "], N_2 = ["
      << join(cls.N_2) << "], in_S = " << (cls.in_S ? "true" : "false") << '\n';
  return kOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const auto& p = cfg.simulate;
  SimConfig sc;
  sc.dt = p.dt;
  sc.T = p.T;
  sc.n_paths = p.n_paths;
  sc.seed = cfg.seed;
  sc.record_every = p.record_every;
  PathEnsemble ens;
  if (p.reference) {
    const auto cls = classify_initial(cfg.net, cfg.x0);
    ens = simulate_A0(cfg.net, cls, freeze(cfg.field, cfg.net, cls), cfg.x0, sc);
  } else {
    ens = simulate(SDESystem{cfg.net, cfg.field}, cfg.x0, sc);
  }
  const auto mon = s_product_monitor(ens, cfg.net);
  Writer w(cfg, "simulate");
  w.json_file("simulate.json", json{{"summary", ens.summary()}, {"monitor", mon.to_json()},
                                    {"reference", p.reference}});
  CsvTable t{"knots", {"path", "t"}, {}};
  for (int c = 1; c <= ens.d; ++c) t.columns.push_back("x" + std::to_string(c));
  for (std::size_t path = 0; path < ens.n_paths; ++path)
    for (std::size_t k = 0; k < ens.n_times(); ++k) {
      std::vector<std::string> row{std::to_string(path), fmt(ens.times[k])};
      for (double v : ens.knot(path, k)) row.push_back(fmt(v));
      t.add(std::move(row));
    }
  w.csv(t);
  out << ens.n_paths << " paths to T = " << fmt(p.T) << "; " << mon.exact_zero
      << " exact-zero S-products, " << mon.negative_knots << " paths with negative knots\n";
  return kOk;
}

int cmd_semigroup(const RunConfig& cfg, std::ostream& out) {
  const auto& p = cfg.semigroup;
  const auto cls = classify_initial(cfg.net, cfg.x0);
  const auto frozen = freeze(cfg.field, cfg.net, cls);
  CsvTable t{"pt_f", {"function", "t", "mean", "std_err", "quadrature_fallback"}, {}};
  json rows = json::array();
  for (std::size_t i = 0; i < p.t.size(); ++i) {
    PtConfig pc;
    pc.n_paths = p.n_paths;
    pc.n_steps = p.n_steps;
    pc.seed = mix_seed(cfg.seed, i);
    for (const auto& f : p.functions) {
      bool fallback = false;
      const auto e = pt_f(cfg.net, cls, frozen, cfg.x0, p.t[i], f, pc, &fallback);
      t.add({f.name(), fmt(p.t[i]), fmt(e.mean), fmt(e.std_err), fallback ? "true" : "false"});
      rows.push_back(json{{"function", f.name()}, {"t", p.t[i]}, {"estimate", e},
                          {"quadrature_fallback", fallback}});
      out << f.name() << " t=" << fmt(p.t[i]) << ": " << fmt(e.mean) << " +- " << fmt(e.std_err)
          << '\n';
    }
  }
  Writer w(cfg, "semigroup");
  w.json_file("semigroup.json",
              json{{"frozen", frozen.to_json()}, {"classification", cls.to_json()}, {"rows", rows}});
  w.csv(t);
  return kOk;
}

int cmd_moments(const RunConfig& cfg, std::ostream& out) {
  const auto& p = cfg.moments;
  const auto cls = classify_initial(cfg.net, cfg.x0);
  const auto frozen = freeze(cfg.field, cfg.net, cls);
  CsvTable t{"identities", {"t", "j", "identity", "estimate", "std_err", "oracle", "z"}, {}};
  json reps = json::array();
  bool pass = true;
  for (std::size_t i = 0; i < p.t.size(); ++i) {
    const auto rep = verify_moments(cfg.net, cls, frozen, cfg.x0, p.t[i], p.n_paths,
                                    mix_seed(cfg.seed, i), p.gamma_scale, p.n_steps);
    pass = pass && rep.pass;
    for (const auto& c : rep.checks)
      t.add({fmt(p.t[i]), std::to_string(c.j), c.identity, fmt(c.estimate.mean),
             fmt(c.estimate.std_err), fmt(c.oracle), fmt(c.z)});
    reps.push_back(rep.to_json());
  }
  Writer w(cfg, "moments");
  w.json_file("moments.json", json{{"reports", reps}, {"pass", pass}});
  w.csv(t);
  out << "moment identities " << (pass ? "hold" : "FAIL") << " at |z| <= 4 (" << t.rows.size()
      << " checks)\n";
  return pass ? kOk : kCheckFailure;
}

int cmd_norms(const RunConfig& cfg, std::ostream& out) {
  const auto& p = cfg.norms;
  const auto cls = classify_initial(cfg.net, cfg.x0);
  const auto frozen = freeze(cfg.field, cfg.net, cls);
  const auto grid = GridSpec::tensor(cls, p.alpha, p.axes, p.scales);
  std::vector<const Observable*> ptrs;
  for (const auto& f : p.functions) ptrs.push_back(&f);
  NormMcConfig mc = p.mc;
  mc.seed = cfg.seed;
  const auto sg = semigroup_norms(ptrs, cfg.net, cls, frozen, p.alpha, p.t_grid, grid.points, mc);
  CsvTable t{"norms", {"function", "weak", "semigroup", "band_lo", "band_hi", "ratio"}, {}};
  json rows = json::array();
  for (std::size_t i = 0; i < p.functions.size(); ++i) {
    const auto sn = weighted_seminorm(p.functions[i], cls, grid);
    const double ratio = sn.weak > 0.0 ? sg[i].estimate / sn.weak : INFINITY;
    t.add({p.functions[i].name(), fmt(sn.weak), fmt(sg[i].estimate), fmt(sg[i].band_lo),
           fmt(sg[i].band_hi), fmt(ratio)});
    rows.push_back(json{{"function", p.functions[i].name()}, {"seminorm", sn.to_json()},
                        {"semigroup", sg[i].to_json()}, {"ratio", ratio}});
    out << p.functions[i].name() << ": weak " << fmt(sn.weak) << ", semigroup "
        << fmt(sg[i].estimate) << '\n';
  }
  Writer w(cfg, "norms");
  w.json_file("norms.json", json{{"rows", rows}, {"grid_points", grid.points.size()},
                                 {"displacements", grid.displacements.size()}});
  w.csv(t);
  return kOk;
}

int cmd_resolvent(const RunConfig& cfg, std::ostream& out) {
  const auto& p = cfg.resolvent;
  const auto cls = classify_initial(cfg.net, cfg.x0);
  const auto frozen = freeze(cfg.field, cfg.net, cls);
  const CoefficientField tilde =
      p.tilde ? *p.tilde : localized_perturbation(frozen, cfg.x0, p.db, p.dgamma, p.bump_radius);

  CsvTable rt{"r_lambda", {"function", "lambda", "value", "std_err", "quad_error", "tail",
                           "budget"}, {}};
  json rvals = json::array();
  for (const auto& f : p.functions)
    for (double lambda : p.lambdas) {
      const auto e = r_lambda(f, cfg.net, cls, frozen, cfg.x0, lambda, p.resolvent, cfg.seed);
      rt.add({f.name(), fmt(lambda), fmt(e.value.mean), fmt(e.value.std_err), fmt(e.quad_error),
              fmt(e.tail), fmt(e.budget)});
      rvals.push_back(json{{"function", f.name()}, {"lambda", lambda}, {"estimate", e.to_json()}});
    }

  const auto grid = tensor_grid(p.axes);
  const auto reps = key_estimate_probe(p.functions, tilde, cfg.net, cls, frozen, grid, p.lambdas,
                                       p.resolvent, mix_seed(cfg.seed, 1), p.eps_max);
  CsvTable kt{"key_estimate", {"function", "lambda", "ratio", "budget"}, {}};
  json keys = json::array();
  bool pass = true;
  double lambda1 = 0.0;
  for (const auto& rep : reps) {
    pass = pass && rep.pass;
    lambda1 = rep.lambda1 > 0.0 && lambda1 >= 0.0 ? std::max(lambda1, rep.lambda1) : -1.0;
    for (const auto& row : rep.rows)
      kt.add({rep.function, fmt(row.lambda), fmt(row.ratio), fmt(row.budget)});
    keys.push_back(rep.to_json());
  }
  lambda1 = std::max(lambda1, 0.0);
  out << "key estimate " << (pass ? "holds" : "FAILS") << "; fitted lambda_1 = " << fmt(lambda1)
      << '\n';

  json body{{"tilde", tilde.to_json()}, {"r_lambda", rvals}, {"key_estimate", keys},
            {"fitted_lambda1", lambda1}, {"pass", pass}};
  Writer w(cfg, "resolvent");
  if (p.run_series) {
    const double lambda = p.series_lambda > 0.0 ? p.series_lambda : lambda1;
    if (lambda <= 0.0) throw PreconditionViolated("series: no lambda satisfies the key estimate");
    SeriesConfig sc;
    sc.axes = p.axes;
    sc.resolvent = p.resolvent;
    const auto series = perturbation_series(p.functions.front(), tilde, cfg.net, cls, frozen,
                                            cfg.x0, lambda, p.series_terms, sc,
                                            mix_seed(cfg.seed, 2));
    body["series"] = series.to_json();
    CsvTable st{"series", {"n", "g_norm", "ratio"}, {}};
    for (std::size_t n = 0; n < series.ratios.size(); ++n)
      st.add({std::to_string(n), fmt(series.g_norms[n]), fmt(series.ratios[n])});
    w.csv(st);
    out << "series partial sum at x0 = " << fmt(series.partial_sums.back()) << '\n';
  }
  w.json_file("resolvent.json", std::move(body));
  w.csv(rt);
  w.csv(kt);
  return pass ? kOk : kCheckFailure;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Writer w(cfg, "verify");
  const auto rep = run_verify(cfg.verify, cfg.seed, [&](const CheckResult& r) {
    err << "criterion " << r.id << " (" << r.name << "): " << to_string(r.status) << " in "
        << fmt(std::round(r.elapsed_s * 10) / 10) << " s\n";
  });
  for (const auto& c : rep.checks) {
    out << "criterion " << c.id << " " << c.name << ": " << to_string(c.status) << " - "
        << c.summary << '\n';
    for (const auto& t : c.tables) w.csv(t);
  }
  w.csv(rep.summary_table());
  w.json_file("verify.json", rep.to_json());
  bool power = false;
  for (const auto& c : rep.checks) power = power || c.status == CheckStatus::InsufficientPower;
  if (power)
    out << "insufficient power: path counts below a quarter of the nominal ones; outcomes of "
           "those checks are diagnostics, not evidence\n";
  out << (rep.all_pass ? "all checks pass" : "some checks did not pass") << '\n';
  return rep.all_pass ? kOk : kCheckFailure;
}

int exit_code_for(const Error& e) {
  const std::string& c = e.code();
  if (c == "BlowUp" || c == "Divergence" || c == "DegenerateFamily") return kCheckFailure;
  if (c == "EvaluationFailure") return kInternalError;
  return kConfigError;
}

}  // namespace

json output_meta(const RunConfig& cfg, const std::string& command) {
  return json{{"tool", "catnet"},
              {"version", CATNET_VERSION},
              {"command", command},
              {"config_hash", hex64(cfg.hash)},
              {"seed", cfg.seed},
              {"config", cfg.resolved},
              {"wall_clock", wall_clock()}};
}

int run_command(const std::string& command, const RunConfig& cfg, std::ostream& out,
                std::ostream& err) {
  try {
    if (command == "classify") return cmd_classify(cfg, out);
    if (command == "simulate") return cmd_simulate(cfg, out);
    if (command == "semigroup") return cmd_semigroup(cfg, out);
    if (command == "moments") return cmd_moments(cfg, out);
    if (command == "norms") return cmd_norms(cfg, out);
    if (command == "resolvent") return cmd_resolvent(cfg, out);
    if (command == "verify") return cmd_verify(cfg, out, err);
    err << "unknown command '" << command << "'\n";
    return kConfigError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const Error& e) {
    err << e.code() << ": " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
}

int run_cli(int argc, char** argv) {
  CLI::App app{"catnet: catalytic branching networks, semigroups and resolvents"};
  app.set_version_flag("--version", std::string(CATNET_VERSION));
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Master seed (overrides the config)");
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  auto* out_opt = app.add_option("--out", out_dir, "Output directory (overrides the config)");
  app.add_option("--threads", threads, "Worker threads (0: hardware concurrency)");
  app.require_subcommand(1, 1);
  app.fallthrough();
  const char* commands[][2] = {
      {"classify", "Classify the initial point"},
      {"simulate", "Simulate the catalytic system or its frozen reference"},
      {"semigroup", "Estimate P_t f at x0"},
      {"moments", "Check the catalyst-mass moment identities"},
      {"norms", "Grid seminorms and semigroup norms"},
      {"resolvent", "Resolvent values, key estimate and perturbation series"},
      {"verify", "Run the acceptance suite"},
  };
  for (const auto& c : commands) app.add_subcommand(c[0], c[1]);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  RunConfig cfg;
  try {
    cfg = config_path.empty() ? parse_run_config(default_config_json())
                              : load_run_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  if (*seed_opt) {
    cfg.seed = seed;
    cfg.resolved["seed"] = seed;
  }
  if (*out_opt) cfg.output_dir = out_dir;
  set_worker_count(threads ? threads : std::max(1u, std::thread::hardware_concurrency()));
  return run_command(command, cfg, std::cout, std::cerr);
}

std::string comparable_content(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  if (file.extension() == ".json") {
    json j = json::parse(text);
    std::function<void(json&)> strip = [&](json& v) {
      if (v.is_object()) {
        v.erase("wall_clock");
        v.erase("elapsed_s");
        for (auto& [k, child] : v.items()) strip(child);
      } else if (v.is_array()) {
        for (auto& child : v) strip(child);
      }
    };
    strip(j);
    return j.dump(2);
  }
  std::istringstream lines(text);
  std::string line, outp;
  while (std::getline(lines, line)) {
    if (!line.empty() && line[0] == '#') {
      const auto pos = line.find(" wall_clock=");
      if (pos != std::string::npos) line.erase(pos);
    }
    outp += line + '\n';
  }
  return outp;
}

}  // namespace catnet
