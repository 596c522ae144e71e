#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace combraman::runner {

struct RunOptions {
  std::string command;
  std::string config_path;
  std::string out_dir;  // empty: [general] out_dir, else "out"
  std::optional<std::uint64_t> seed;      // overrides [general] seed
  std::optional<double> theta_deg;        // overrides [polarization]
  std::string theta_scan;                 // "a:b:n" degrees, rabi only
  bool invert = false;  // dynamics: report remaining instead of transferred
};

// Known subcommand names, comma-separated (for usage messages).
std::string command_list();

// Executes one subcommand: parses and validates the config, computes,
// writes the result files and the run manifest into out_dir, and returns
// the result JSON. Throws ConfigError/ComputeError.
std::string run(const RunOptions& opts);

}  // namespace combraman::runner
