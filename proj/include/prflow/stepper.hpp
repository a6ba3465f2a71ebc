#pragma once

#include <utility>
#include <vector>

#include "prflow/fieldops.hpp"
#include "prflow/grid.hpp"
#include "prflow/thermo.hpp"
#include "prflow/transport.hpp"

namespace prflow {

struct SchemeConfig {
  double dt = 0.0;       // [s]
  double theta = 0.0;    // stabilization weight, >= 0
  double lambda = 0.0;   // volumetric viscosity combination [Pa s]
  double eta = 0.0;      // shear viscosity [Pa s]
  double gravity = 0.0;  // [m/s^2], acts along -y
  double outer_tol = 1e-10;
  int outer_max = 50;
  double inner_newton_tol = 1e-12;
  int inner_newton_max = 30;
  double T_recovery_tol = 1e-12;  // relative
  double T_min = 100.0, T_max = 1000.0;  // temperature recovery bracket [K]

  void validate() const;
};

// Discrete fields at one time level. step() treats states as immutable
// snapshots and returns a new one.
struct SimState {
  std::vector<CellField> n;  // per-component molar densities [mol/m^3]
  CellField T;               // [K]
  FaceField u;               // staggered velocity [m/s]
  double t = 0.0;            // [s]
};

struct StepReport {
  int outer_iters = 0;
  bool converged = false;
  // relative residuals of the discrete mass, energy and temperature-recovery
  // equations at the accepted state
  double res_mass = 0.0;
  double res_energy = 0.0;
  double res_T = 0.0;
  // diagnostics snapshot of the accepted state
  double entropy = 0.0;
  double energy = 0.0;
  std::vector<double> moles;
};

// Everything fixed over a run: the fluid system, mesh, flux closure, scheme
// knobs and the gravity potential g*h sampled at cell centers.
struct Problem {
  Mixture mix;
  Grid2D grid;
  MobilitySpec mobility;
  SchemeConfig scheme;
  CellField gh;

  void validate() const;
};

namespace stepper {

// Discrete chemical potential: implicit convex part at n_new, explicit
// concave part at n_old, temperature implicit in both, plus the
// -sum_j div(c_ij grad n_j_new) interfacial term.
std::vector<CellField> chemical_potential_fields(const Mixture& mix, const Grid2D& g,
                                                 const std::vector<CellField>& n_new,
                                                 const std::vector<CellField>& n_old,
                                                 const CellField& T_new, double theta,
                                                 Exec ex = default_exec());

// u* = u_old - (dt/rho_old)(sum_i n_i_old grad mu_i_new + s_old grad T_new - rho_old g)
// on faces, with cell quantities arithmetically averaged to faces. s_old and
// rho_old are evaluated from state_old.
FaceField intermediate_velocity(const Problem& p, const SimState& state_old,
                                const std::vector<CellField>& mu_new, const CellField& T_new,
                                Exec ex = default_exec());

// Explicit conservative update n_i_new = n_i_old - dt [div(u* n_i_old)_upwind + div J_i].
std::vector<CellField> solve_mass(const Grid2D& g, const std::vector<CellField>& n_old,
                                  const FaceField& u_star, const std::vector<FaceField>& J_new,
                                  double dt, Exec ex = default_exec());

// Implicit momentum solve: rho_old (u - u*)/dt + (rho_old u* + sum_i Mw_i J_i) . grad u
// = div tau(u), first-order upwind advection, no-penetration/free-slip or
// periodic boundaries.
FaceField solve_momentum(const Problem& p, const FaceField& u_star,
                         const std::vector<FaceField>& J_new, const CellField& rho_old);

// Plain-loop evaluation of the momentum equation residual (independent of the
// matrix assembly path).
FaceField momentum_residual(const Problem& p, const FaceField& u_new, const FaceField& u_star,
                            const std::vector<FaceField>& J_new, const CellField& rho_old);

// Face vector tau(u) . u used in the energy flux; zero when both viscosities
// vanish.
FaceField stress_dot_velocity(const Problem& p, const FaceField& u);

// Per-cell inversion of theta_b(n_new, T) = e_t - f_grad - kinetic - potential
// for T, safeguarded Newton with bisection fallback inside
// [T_min, T_max]. e_t is the total energy density including the interfacial
// gradient energy of n_new.
CellField recover_temperature(const Problem& p, const CellField& e_t,
                              const std::vector<CellField>& n_new, const FaceField& u_new,
                              const CellField& rho_new, const CellField* T_init = nullptr,
                              Exec ex = default_exec());

// Conservative total-energy update. q_new may be a zero field to obtain the
// update without the heat-flux contribution.
CellField energy_update(const Problem& p, const SimState& state_old,
                        const std::vector<CellField>& n_new, const CellField& T_new,
                        const FaceField& u_new, const FaceField& u_star,
                        const std::vector<CellField>& mu_new, const FaceField& q_new,
                        const std::vector<FaceField>& J_new, Exec ex = default_exec());

// Total energy density e_t of a state (bulk + interfacial + kinetic +
// potential), the quantity conserved by energy_update.
CellField total_energy_density(const Problem& p, const SimState& s, Exec ex = default_exec());

// One semi-implicit time step: outer fixed-point iteration over the coupled
// system with implicit mass and energy sub-solves. Throws SolverError on
// non-convergence and DomainError if the state leaves the admissible domain.
std::pair<SimState, StepReport> step(const Problem& p, const SimState& state);

}  // namespace stepper
}  // namespace prflow
