#pragma once

#include <functional>
#include <string>
#include <vector>

#include "prflow/thermo.hpp"

namespace prflow::selfcheck {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;  // key figures: worst errors, sample counts, margins
};

struct Options {
  std::string filter;  // substring; empty runs everything
  // Test fixture: evaluates chemical potentials through this hook so a
  // corrupted evaluator can be injected; null uses the library path.
  std::function<std::vector<double>(const Mixture&, const BulkState&)> mu_override;
};

// Runs the finite-difference oracles and invariant suites of all modules on
// deterministic pseudo-random states. Pure and repeatable.
std::vector<CheckResult> run_all(const Options& opt = {});

// One "PASS name detail" / "FAIL name detail" line per check.
std::string format_text(const std::vector<CheckResult>& results);
std::string format_json(const std::vector<CheckResult>& results);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace prflow::selfcheck
