#pragma once

#include <string>
#include <vector>

#include "prflow/stepper.hpp"

namespace prflow {

struct DiagnosticsRecord {
  int step = 0;
  double t = 0.0;           // [s]
  double S_total = 0.0;     // [J/K] per unit depth
  double E_total = 0.0;     // [J] per unit depth
  std::vector<double> moles;
  double kinetic = 0.0;
  double max_u = 0.0;
  double shape = 0.0;       // isoperimetric ratio of the tracked level set; NaN if undefined
};

namespace diagnostics {

// integral of the bulk entropy density (the gradient entropy vanishes for
// constant influence parameters)
double total_entropy(const Problem& p, const SimState& s);

// integral of e_t = f_b + f_grad + T s_b + kinetic + potential
double total_energy(const Problem& p, const SimState& s);

std::vector<double> species_totals(const Grid2D& g, const SimState& s);

double kinetic_total(const Problem& p, const SimState& s);

// 4 pi Area / Perimeter^2 of {f >= level}: area by cell counting, perimeter
// by linear-interpolation contour segments plus domain-boundary closure
// edges. 1 for a disk, pi/4 for the full square domain.
double shape_metric(const Grid2D& g, const CellField& f, double level);

// max-norm over faces of sum_i n_i grad mu_i^b - grad p_b - gamma_b grad T
// with gamma_b = -s_b; O(h) for smooth fields.
double pressure_relation_residual(const Mixture& mix, const Grid2D& g,
                                  const std::vector<CellField>& n, const CellField& T);

// One CSV row worth of monitors; the shape metric tracks component
// shape_component at the midpoint level of its current range (NaN when the
// field is uniform).
DiagnosticsRecord record(const Problem& p, const SimState& s, int step_index,
                         int shape_component);

}  // namespace diagnostics
}  // namespace prflow
