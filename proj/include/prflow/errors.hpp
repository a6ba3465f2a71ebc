#pragma once

#include <stdexcept>
#include <string>

namespace prflow {

// Thermodynamic evaluation outside the admissible domain (n_i <= 0, bn >= 1,
// T <= 0). Raised instead of clamping so solver divergence stays visible.
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration or type invariant violation.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A solve (outer iteration, Newton, linear system, temperature recovery)
// failed to converge.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace prflow
