#pragma once

#include <cstdint>
#include <optional>

#include "qsd/config.hpp"

namespace qsd {

struct RunOptions {
  /// Replaces the file's master_seed for variance studies; recorded in the
  /// manifest as the effective seed.
  std::optional<std::uint64_t> seed_override;
  /// Worker count for trajectory fan-out; 0 means the OpenMP default.
  /// Contractually invisible in the outputs.
  int worker_count = 0;
};

/// Executes the configured experiment, writing its artifacts and a manifest
/// into config.output_dir.  Throws Error on any failure; the CLI translates
/// error kinds into exit codes.
void run_experiment(const RunConfig& config, const RunOptions& options);

}  // namespace qsd
