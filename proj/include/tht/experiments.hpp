#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace tht {

/// Malformed or incomplete experiment configuration; the message names the
/// offending field (or carries the parser's line information).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A sampler or I/O failure after configuration succeeded.
struct ExperimentFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> iters;
  std::optional<int> workers;
  std::optional<std::string> out_dir;
  std::optional<int> dim;
};

/// Runs the experiment described by a JSON config and writes chains.csv,
/// diagnostics.json, and kind-specific artifacts into the output directory
/// (resolved from the override, then THT_OUT_DIR, then the config, then the
/// current directory). Partial artifacts are removed on failure.
///
/// Kinds: mixture1d, mixture_hd, power_pilot, sensor, sensor_gibbs,
/// gap_bridge.
void run_experiment(const std::string& config_path,
                    const RunOverrides& overrides = {});

}  // namespace tht
