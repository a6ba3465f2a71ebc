#pragma once

#include <vector>

#include "prflow/grid.hpp"
#include "prflow/thermo.hpp"

// Cellwise thermodynamic kernels over whole fields. These are the
// data-parallel hot loops of the solver; each cell is evaluated
// independently, so OpenMP execution is bitwise identical to serial.
namespace prflow::fieldops {

CellField mass_density(const Mixture& mix, const std::vector<CellField>& n,
                       Exec ex = default_exec());

CellField s_bulk(const Mixture& mix, const std::vector<CellField>& n, const CellField& T,
                 Exec ex = default_exec());

CellField f_bulk(const Mixture& mix, const std::vector<CellField>& n, const CellField& T,
                 Exec ex = default_exec());

CellField u_internal(const Mixture& mix, const std::vector<CellField>& n, const CellField& T,
                     Exec ex = default_exec());

// mu_i^{b,convex}(n_new, T) + mu_i^{b,concave}(n_old, T) per cell.
std::vector<CellField> mu_bulk_split(const Mixture& mix, const std::vector<CellField>& n_new,
                                     const std::vector<CellField>& n_old, const CellField& T,
                                     double theta, Exec ex = default_exec());

// Interfacial energy 1/2 sum_ij c_ij <grad n_i, grad n_j> from face gradients.
CellField gradient_energy(const Mixture& mix, const Grid2D& g, const std::vector<CellField>& n,
                          Exec ex = default_exec());

// 1/2 rho |u|^2 with |u|^2 face-averaged to cells.
CellField kinetic_energy(const Grid2D& g, const CellField& rho, const FaceField& u,
                         Exec ex = default_exec());

// Throws DomainError naming the first offending cell if any cell state is
// outside the admissible thermodynamic domain.
void check_fields(const Mixture& mix, const std::vector<CellField>& n, const CellField& T);

}  // namespace prflow::fieldops
