#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "catnet/coefficients.hpp"
#include "catnet/network.hpp"
#include "catnet/norms.hpp"
#include "catnet/resolvent.hpp"
#include "catnet/test_function.hpp"

namespace catnet {

/// Typed reader over one JSON object. Every accessor records the key, and
/// finish() rejects keys that were never read, so typos surface as
/// ConfigError with the offending JSON pointer.
class Section {
 public:
  Section(const nlohmann::json& j, std::string pointer);

  bool has(const std::string& key) const;
  double number(const std::string& key, double def);
  double positive(const std::string& key, double def);
  std::size_t count(const std::string& key, std::size_t def);
  int integer(const std::string& key, int def, int lo, int hi);
  bool boolean(const std::string& key, bool def);
  std::string string(const std::string& key, const std::string& def);
  std::vector<double> numbers(const std::string& key, std::vector<double> def);
  std::vector<std::vector<double>> number_lists(const std::string& key,
                                                std::vector<std::vector<double>> def);
  /// Sub-object; an absent key yields an empty object.
  Section child(const std::string& key);
  const nlohmann::json& raw(const std::string& key);
  std::string pointer(const std::string& key) const { return ptr_ + "/" + key; }

  /// Values as read, defaults included.
  const nlohmann::json& resolved() const { return resolved_; }
  void record(const std::string& key, nlohmann::json v) { resolved_[key] = std::move(v); }
  void finish() const;

 private:
  const nlohmann::json* at(const std::string& key);

  nlohmann::json j_;
  std::string ptr_;
  std::vector<std::string> seen_;
  nlohmann::json resolved_ = nlohmann::json::object();
};

struct SimulateParams {
  double dt = 1e-3;
  double T = 1.0;
  std::size_t n_paths = 1000;
  int record_every = 100;
  /// Frozen reference diffusion instead of the full system.
  bool reference = false;
};

struct SemigroupParams {
  std::vector<double> t{1.0};
  std::size_t n_paths = 10000;
  int n_steps = 256;
  std::vector<TestFunction> functions;
};

struct MomentsParams {
  std::vector<double> t{0.5, 1.0};
  std::size_t n_paths = 100000;
  int n_steps = 256;
  double gamma_scale = 1.0;
};

struct NormsParams {
  double alpha = 0.5;
  std::vector<std::vector<double>> axes;
  std::vector<double> scales{0.05, 0.2, 0.5};
  std::vector<double> t_grid{0.01, 0.04, 0.16, 0.64};
  NormMcConfig mc;
  std::vector<TestFunction> functions;
};

struct ResolventParams {
  std::vector<double> lambdas{1, 2, 4, 8, 16, 32, 64};
  std::vector<std::vector<double>> axes;
  ResolventConfig resolvent;
  double eps_max = 0.05;
  std::vector<TestFunction> functions;
  /// Perturbed field given explicitly, or frozen constants plus bumps db,
  /// dgamma of radius bump_radius around x0.
  std::optional<CoefficientField> tilde;
  std::vector<double> db, dgamma;
  double bump_radius = 0.5;
  bool run_series = false;
  double series_lambda = 0.0;  // 0: fitted from the probe
  int series_terms = 3;
};

struct VerifyParams {
  /// Criteria to run (1..9); the reproducibility criterion is a property of
  /// the whole command and is checked by the acceptance binary.
  std::vector<int> checks{1, 2, 3, 4, 5, 6, 7, 8, 9};
  /// Overrides every Monte Carlo path count (power diagnostics).
  std::optional<std::size_t> n_paths;
  /// Multiplies gamma0 in the moment sampler (mutation test).
  double mutate_gamma = 1.0;
};

struct RunConfig {
  BranchingNetwork net;
  CoefficientField field;
  std::vector<double> x0;
  std::uint64_t seed = 2;
  std::string output_dir = "out";

  SimulateParams simulate;
  SemigroupParams semigroup;
  MomentsParams moments;
  NormsParams norms;
  ResolventParams resolvent;
  VerifyParams verify;

  /// Configuration with every default filled in, as embedded in outputs.
  nlohmann::json resolved;
  /// FNV-1a of the compact dump of `resolved` without the seed.
  std::uint64_t hash = 0;
};

/// Two-catalyst network {(1,2), (3,2)} at x0 = (0,1,0) with b = gamma = 1.
nlohmann::json default_config_json();

/// Validates the whole document before anything runs. Throws ConfigError.
RunConfig parse_run_config(const nlohmann::json& j);
/// Throws ConfigError (pointer "") for unreadable files or malformed JSON.
RunConfig load_run_config(const std::string& path);

std::uint64_t fnv1a(const std::string& s);
std::string hex64(std::uint64_t v);

/// Default observables for a network of dimension d: smooth bounded
/// separable functions varying in every coordinate.
std::vector<TestFunction> default_functions(int d);

}  // namespace catnet
