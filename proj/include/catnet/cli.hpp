#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "catnet/config.hpp"

namespace catnet {

enum ExitCode : int { kOk = 0, kCheckFailure = 1, kConfigError = 2, kInternalError = 3 };

/// Metadata block embedded in every output: tool version, config hash,
/// master seed, command, resolved configuration and wall clock.
nlohmann::json output_meta(const RunConfig& cfg, const std::string& command);

/// Runs one subcommand (classify, simulate, semigroup, moments, norms,
/// resolvent, verify) and writes its outputs below cfg.output_dir. Returns
/// the exit code; exceptions are mapped to codes, never propagated.
int run_command(const std::string& command, const RunConfig& cfg, std::ostream& out,
                std::ostream& err);

/// Command-line entry point: catnet <command> [--config F] [--seed S]
/// [--out DIR] [--threads N].
int run_cli(int argc, char** argv);

/// File contents with wall-clock fields removed: JSON keys "wall_clock" and
/// "elapsed_s", and the wall_clock= token of CSV comment lines.
std::string comparable_content(const std::filesystem::path& file);

}  // namespace catnet
