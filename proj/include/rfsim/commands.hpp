#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "rfsim/config.hpp"

namespace rfsim::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kNumericDiagnostic = 2, kIoError = 3 };

struct CommandOutput {
  std::vector<std::filesystem::path> files;
  nlohmann::json summary;
  bool overflow = false;
};

/// Inhibitory-pulse ringdown: trace (time course and U-V phase plane),
/// events and metrics.
CommandOutput cmd_ringdown(const ExperimentConfig& cfg, const std::filesystem::path& out);
/// Step-input frequency/input sweep.
CommandOutput cmd_fi(const ExperimentConfig& cfg, const std::filesystem::path& out);
/// Chirp raster at the configured bias, plus the bias/threshold tuning map.
CommandOutput cmd_chirp(const ExperimentConfig& cfg, const std::filesystem::path& out);
/// Resonant frequency against bias current.
CommandOutput cmd_sweep_bias(const ExperimentConfig& cfg, const std::filesystem::path& out);
/// Die-to-die population statistics.
CommandOutput cmd_montecarlo(const ExperimentConfig& cfg, const std::filesystem::path& out);

const std::vector<std::string>& subcommands();

/// Validates cfg, dispatches, writes the effective config next to the
/// outputs and maps failures onto exit codes. Messages go to `log`.
int run(const std::string& subcommand, const ExperimentConfig& cfg,
        const std::filesystem::path& out, std::ostream& log);

}  // namespace rfsim::cli
