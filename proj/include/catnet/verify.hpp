#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "catnet/config.hpp"

namespace catnet {

/// Fixed-column table written as CSV. Cells are preformatted so output is
/// byte-stable.
struct CsvTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  std::string render() const;
};

/// Shortest round-trip representation of a double.
std::string fmt(double v);

enum class CheckStatus { Pass, Fail, InsufficientPower, Error };
std::string to_string(CheckStatus s);

struct CheckResult {
  int id = 0;
  std::string name;
  CheckStatus status = CheckStatus::Error;
  /// Outcome of the statistical test itself, independent of power.
  bool criterion_met = false;
  std::string summary;
  std::size_t nominal_paths = 0;
  std::size_t used_paths = 0;
  double runtime_limit_s = 0.0;
  double elapsed_s = 0.0;
  nlohmann::json details;
  std::vector<CsvTable> tables;

  nlohmann::json to_json() const;
};

struct VerifyOptions {
  std::uint64_t seed = 2;
  /// Overrides the Monte Carlo path count of every check.
  std::optional<std::size_t> n_paths;
  double mutate_gamma = 1.0;
};

/// A check is underpowered when its path count is below a quarter of the
/// nominal one: standard errors are then at least twice the size the
/// tolerances were set for, so an apparent pass carries no evidence.
bool underpowered(std::size_t used, std::size_t nominal);

CheckResult check_extinction(const VerifyOptions& o);
CheckResult check_cluster(const VerifyOptions& o);
CheckResult check_moments(const VerifyOptions& o);
CheckResult check_inverse_moment(const VerifyOptions& o);
CheckResult check_semigroup(const VerifyOptions& o);
CheckResult check_norms(const VerifyOptions& o);
/// Also returns the fitted lambda_1 (0 if no lambda passed).
CheckResult check_key_estimate(const VerifyOptions& o, double* lambda1 = nullptr);
/// lambda1 <= 0 refits it with the key-estimate probe.
CheckResult check_series(const VerifyOptions& o, double lambda1);
CheckResult check_monitor(const VerifyOptions& o);

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_pass = false;

  nlohmann::json to_json() const;
  /// One row per check; no timing columns.
  CsvTable summary_table() const;
};

/// Runs the selected checks in order. A check that throws is recorded with
/// status Error and the suite continues.
VerifyReport run_verify(const VerifyParams& params, std::uint64_t seed,
                        const std::function<void(const CheckResult&)>& on_done = {});

}  // namespace catnet
