#pragma once

#include <vector>

#include "prflow/grid.hpp"
#include "prflow/thermo.hpp"

namespace prflow {

// Reference-velocity convention: the molar model keeps sum_i J_i = 0, the
// mass model keeps sum_i Mw_i J_i = 0.
enum class FluxModel { molar, mass };

struct MobilitySpec {
  FluxModel model = FluxModel::mass;
  std::vector<double> D;  // M x M diffusion coefficients [m^2/s], row-major
  double kappa0 = 0.0;    // thermal conductivity prefactor, K = kappa0 * n

  double d(int i, int j, int m) const { return D[size_t(i) * m + j]; }
  void validate(int m) const;
};

namespace transport {

// Onsager mobility matrix L(n), M x M row-major, symmetric positive
// semi-definite. The diagonal is accumulated from the off-diagonal entries so
// the model's null vector holds to round-off.
void mobility_into(const MobilitySpec& spec, const Mixture& mix, const double* n, double* L);
std::vector<double> mobility(const MobilitySpec& spec, const Mixture& mix, const BulkState& s);

// Discrete diffusion fluxes J_i = -sum_j L_ij(n_old, T_old) grad((mu_j + Mw_j g h)/T_new)
// with L face-averaged. gh holds g*height at cell centers.
std::vector<FaceField> diffusion_fluxes(const MobilitySpec& spec, const Mixture& mix,
                                        const Grid2D& g, const std::vector<CellField>& n_old,
                                        const CellField& T_old,
                                        const std::vector<CellField>& mu_new,
                                        const CellField& T_new, const CellField& gh,
                                        Exec ex = default_exec());

// Fourier heat flux q = -K grad(T_new) with K = kappa0 * sum_i n_old_i on faces.
FaceField heat_flux(const MobilitySpec& spec, const Grid2D& g,
                    const std::vector<CellField>& n_old, const CellField& T_new,
                    Exec ex = default_exec());

}  // namespace transport
}  // namespace prflow
