#include "prflow/run.hpp"

#include <filesystem>
#include <sstream>

#include "prflow/errors.hpp"
#include "prflow/output.hpp"

namespace prflow::run {

namespace {

std::string snap_name(int step) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "state_%06d", step);
  return buf;
}

void write_snapshot(const Problem& p, const SimState& s, const std::string& dir, int step,
                    bool vtk) {
  output::write_file_atomic(dir + "/" + snap_name(step) + ".dat",
                            output::snapshot_text(p, s));
  if (vtk)
    output::write_file_atomic(dir + "/" + snap_name(step) + ".vtk",
                              output::snapshot_vtk(p, s));
}

}  // namespace

int run_simulation(const RunConfig& cfg, const std::string& out_dir_override) {
  const Problem p = config::build_problem(cfg);
  SimState state = config::initial_state(cfg, p);
  const std::string dir =
      out_dir_override.empty() ? cfg.run.output_dir : out_dir_override;
  std::filesystem::create_directories(dir);

  std::string csv = output::csv_header(p.mix);
  csv += output::csv_row(diagnostics::record(p, state, 0, cfg.run.shape_component));
  write_snapshot(p, state, dir, 0, cfg.run.vtk);

  const int every = cfg.run.snapshot_every;
  int exit_code = 0;
  int k = 0;
  for (; k < cfg.run.steps; ++k) {
    try {
      auto [next, rep] = stepper::step(p, state);
      state = std::move(next);
      std::ostringstream msg;
      msg << "step " << k + 1 << "/" << cfg.run.steps << " outer=" << rep.outer_iters
          << " S=" << output::fmt17(rep.entropy) << " E=" << output::fmt17(rep.energy);
      output::log(output::LogLevel::debug, msg.str());
    } catch (const std::exception& e) {
      std::string what = e.what();
      for (char& c : what)
        if (c == ',' || c == '\n') c = ';';
      csv += "FAILED," + std::to_string(k + 1) + "," + what + "\n";
      output::log(output::LogLevel::info,
                  "step " + std::to_string(k + 1) + " failed: " + e.what());
      exit_code = 2;
      break;
    }
    csv += output::csv_row(diagnostics::record(p, state, k + 1, cfg.run.shape_component));
    if (every > 0 && (k + 1) % every == 0 && k + 1 != cfg.run.steps)
      write_snapshot(p, state, dir, k + 1, cfg.run.vtk);
  }
  if (exit_code == 0 && cfg.run.steps > 0) write_snapshot(p, state, dir, k, cfg.run.vtk);
  output::write_file_atomic(dir + "/diagnostics.csv", csv);
  return exit_code;
}

}  // namespace prflow::run
