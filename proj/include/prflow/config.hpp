#pragma once

#include <string>
#include <vector>

#include "prflow/stepper.hpp"

namespace prflow {

// Initial condition: per-component molar densities inside and outside an
// axis-aligned rectangle (the droplet), a uniform temperature and zero
// velocity; or a snapshot file holding the fields.
struct InitialCondition {
  std::vector<double> inside;   // [mol/m^3]
  std::vector<double> outside;  // [mol/m^3]
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;  // droplet rectangle [m]
  double T = 0.0;               // uniform initial temperature [K]
  std::string field_file;       // when set, overrides the rectangle fields
};

struct RunSection {
  int steps = 0;
  int snapshot_every = 0;       // 0: only initial and final snapshots
  std::string output_dir = "out";
  bool vtk = false;
  int shape_component = -1;     // index into components; default: last
};

struct RunConfig {
  Mixture mix;
  Grid2D grid;
  double Lx = 0.0, Ly = 0.0;    // [m]
  SchemeConfig scheme;
  MobilitySpec mobility;
  InitialCondition initial;
  RunSection run;
};

namespace config {

// Parses and validates a JSON config file. Physical quantities accept either
// plain SI numbers or "value unit" strings (e.g. "6.8663 kmol/m^3",
// "45.99 bar", "20 nm", "1e-12 s"). Throws ValidationError with the JSON
// path of the offending entry.
RunConfig parse_file(const std::string& path);
RunConfig parse_text(const std::string& text, const std::string& origin = "<string>");

// Serializes a config back to JSON with all quantities in SI base units.
// parse_text(emit(cfg)) reproduces cfg exactly.
std::string emit(const RunConfig& cfg);

Problem build_problem(const RunConfig& cfg);
SimState initial_state(const RunConfig& cfg, const Problem& p);

}  // namespace config
}  // namespace prflow
