#pragma once

#include <string>
#include <vector>

#include "prflow/diagnostics.hpp"
#include "prflow/stepper.hpp"

namespace prflow::output {

// All floating-point text output uses 17 significant digits so values
// round-trip exactly.
std::string fmt17(double v);

// Atomic file write: temp file in the same directory, then rename.
void write_file_atomic(const std::string& path, const std::string& content);

std::string csv_header(const Mixture& mix);
std::string csv_row(const DiagnosticsRecord& r);

// Plain-text structured-grid snapshot of a state (cell scalars and staggered
// velocity components, row per j line).
std::string snapshot_text(const Problem& p, const SimState& s);
SimState read_snapshot(const std::string& path, const Problem& p);

// Legacy ASCII VTK structured-points file with cell data (molar densities,
// temperature, cell-averaged velocity vectors) for external viewers.
std::string snapshot_vtk(const Problem& p, const SimState& s);

// Log verbosity from the PRFLOW_LOG environment variable: quiet|info|debug.
enum class LogLevel { quiet = 0, info = 1, debug = 2 };
LogLevel log_level();
void log(LogLevel at, const std::string& msg);

}  // namespace prflow::output
