#pragma once

#include <string>

#include "prflow/config.hpp"

namespace prflow::run {

// Drives a full simulation: writes the diagnostics CSV (one row per state,
// including the initial one) and field snapshots at the configured cadence.
// Returns 0 on success, 2 on a solver failure (partial artifacts are kept
// with a FAILED marker row in the CSV).
int run_simulation(const RunConfig& cfg, const std::string& out_dir_override = "");

}  // namespace prflow::run
