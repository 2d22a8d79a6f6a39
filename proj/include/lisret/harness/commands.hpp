#pragma once

// CLI subcommands. Each throws lisret::Error subclasses; `exit_code_for`
// maps them to the documented exit codes.

#include "lisret/harness/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace lisret::harness {

enum ExitCode : int { ok = 0, config_error = 2, numerical_error = 3, io_error = 4 };

struct CommandOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<std::string> method;
  std::optional<Eigen::Index> rank;
  std::optional<double> threshold;
};

/// Loads the config (defaults when no path is given) and applies overrides.
ExperimentConfig resolve_config(const CommandOptions& options, std::string* overrides = nullptr);

/// Writes a commented config template and the bundled ensemble file.
void cmd_init(const CommandOptions& options, std::ostream& log);

/// Writes truth, noiseless and noisy spectra, prior band data and a manifest.
void cmd_simulate(const CommandOptions& options, std::ostream& log);

/// MAP/Laplace, then the selected method's chain, lifted chain, envelope,
/// basis, diagnostics, timing and manifest.
void cmd_retrieve(const CommandOptions& options, std::ostream& log);

/// Rank sweep of the reduced methods against a full-space reference run.
void cmd_compare(const CommandOptions& options, std::ostream& log);

/// Recomputes the diagnostics summary of a retrieval output directory.
void cmd_report(const CommandOptions& options, std::ostream& log);

int exit_code_for(const std::exception& e);

}  // namespace lisret::harness
