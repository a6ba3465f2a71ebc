#include "prflow/transport.hpp"

#include <cmath>

#include "prflow/errors.hpp"

namespace prflow {

void MobilitySpec::validate(int m) const {
  if (int(D.size()) != m * m) throw ValidationError("diffusion matrix must be M x M");
  for (int i = 0; i < m; ++i) {
    if (d(i, i, m) != 0.0) throw ValidationError("diffusion matrix diagonal must be zero");
    for (int j = 0; j < m; ++j) {
      if (d(i, j, m) != d(j, i, m)) throw ValidationError("diffusion matrix must be symmetric");
      if (i != j && m > 1 && d(i, j, m) <= 0.0)
        throw ValidationError("off-diagonal diffusion coefficients must be positive");
    }
  }
  if (kappa0 < 0.0) throw ValidationError("thermal conductivity prefactor must be >= 0");
}

namespace transport {

void mobility_into(const MobilitySpec& spec, const Mixture& mix, const double* n, double* L) {
  const int m = mix.size();
  const double R = mix.R;
  double ntot = 0.0, rho = 0.0;
  for (int i = 0; i < m; ++i) {
    if (!(n[i] > 0.0)) throw DomainError("mobility: molar densities must be positive");
    ntot += n[i];
    rho += mix.components[i].Mw * n[i];
  }

  if (spec.model == FluxModel::molar) {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        if (i != j) L[size_t(i) * m + j] = -spec.d(i, j, m) * (n[i] * n[j]) / (ntot * R);
    // diagonal from the off-diagonals: row sums vanish exactly
    for (int i = 0; i < m; ++i) {
      double s = 0.0;
      for (int j = 0; j < m; ++j)
        if (j != i) s += L[size_t(i) * m + j];
      L[size_t(i) * m + i] = -s;
    }
  } else {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        if (i != j) L[size_t(i) * m + j] = -spec.d(i, j, m) * (n[i] * n[j]) / (rho * R);
    // diagonal chosen so sum_i Mw_i L_ij = 0 exactly (mass-average velocity)
    for (int j = 0; j < m; ++j) {
      double s = 0.0;
      for (int i = 0; i < m; ++i)
        if (i != j) s += mix.components[i].Mw * L[size_t(i) * m + j];
      L[size_t(j) * m + j] = -s / mix.components[j].Mw;
    }
  }
}

std::vector<double> mobility(const MobilitySpec& spec, const Mixture& mix, const BulkState& s) {
  std::vector<double> L(size_t(mix.size()) * mix.size());
  mobility_into(spec, mix, s.n.data(), L.data());
  return L;
}

std::vector<FaceField> diffusion_fluxes(const MobilitySpec& spec, const Mixture& mix,
                                        const Grid2D& g, const std::vector<CellField>& n_old,
                                        const CellField& /*T_old*/,
                                        const std::vector<CellField>& mu_new,
                                        const CellField& T_new, const CellField& gh, Exec ex) {
  // The lagged temperature is part of the flux contract but the mobility
  // models used here do not depend on it.
  const int m = mix.size();
  const int nc = g.cells();

  // driving potentials (mu_j + Mw_j g h)/T on cells, then their face gradients
  std::vector<FaceField> gradG(m);
  for (int j = 0; j < m; ++j) {
    CellField G(g);
    const double mw = mix.components[j].Mw;
    par_for(ex, nc, [&](int idx) {
      G.v[idx] = (mu_new[j].v[idx] + mw * gh.v[idx]) / T_new.v[idx];
    });
    gradG[j] = grid::grad(g, G, ex);
  }

  // cellwise mobilities, row-major blocks of M x M per cell
  std::vector<double> Lc(size_t(nc) * m * m);
  par_for(ex, nc, [&](int idx) {
    thread_local std::vector<double> ncell;
    ncell.resize(m);
    for (int i = 0; i < m; ++i) ncell[i] = n_old[i].v[idx];
    mobility_into(spec, mix, ncell.data(), &Lc[size_t(idx) * m * m]);
  });

  const int nx = g.nx, ny = g.ny;
  const bool periodic = g.bc == BcMode::periodic;
  std::vector<FaceField> J(m, FaceField(g));

  auto lface = [&](int ca, int cb, int i, int j) {
    return 0.5 * (Lc[size_t(ca) * m * m + i * m + j] + Lc[size_t(cb) * m * m + i * m + j]);
  };

  par_for(ex, (nx + 1) * ny, [&](int idx) {
    const int i = idx % (nx + 1), jj = idx / (nx + 1);
    int cl = i - 1, cr = i;
    if (i == 0 || i == nx) {
      if (!periodic) return;  // no-flux boundary face
      cl = nx - 1;
      cr = 0;
    }
    const int ca = jj * nx + cl, cb = jj * nx + cr;
    for (int a = 0; a < m; ++a) {
      double flux = 0.0;
      for (int b = 0; b < m; ++b) flux -= lface(ca, cb, a, b) * gradG[b].fx(i, jj);
      J[a].fx(i, jj) = flux;
    }
  });
  par_for(ex, nx * (ny + 1), [&](int idx) {
    const int i = idx % nx, jj = idx / nx;
    int cb_j = jj - 1, ct_j = jj;
    if (jj == 0 || jj == ny) {
      if (!periodic) return;
      cb_j = ny - 1;
      ct_j = 0;
    }
    const int ca = cb_j * nx + i, cb = ct_j * nx + i;
    for (int a = 0; a < m; ++a) {
      double flux = 0.0;
      for (int b = 0; b < m; ++b) flux -= lface(ca, cb, a, b) * gradG[b].fy(i, jj);
      J[a].fy(i, jj) = flux;
    }
  });
  return J;
}

FaceField heat_flux(const MobilitySpec& spec, const Grid2D& g,
                    const std::vector<CellField>& n_old, const CellField& T_new, Exec ex) {
  const int m = int(n_old.size());
  for (double t : T_new.v)
    if (!(t > 0.0)) throw DomainError("heat_flux: temperature must be positive");

  CellField K(g);
  par_for(ex, g.cells(), [&](int idx) {
    double ntot = 0.0;
    for (int i = 0; i < m; ++i) ntot += n_old[i].v[idx];
    K.v[idx] = spec.kappa0 * ntot;
  });
  const FaceField Kf = grid::face_avg(g, K, ex);
  const FaceField gT = grid::grad(g, T_new, ex);
  FaceField q(g);
  par_for(ex, int(q.x.size()), [&](int k) { q.x[k] = -Kf.x[k] * gT.x[k]; });
  par_for(ex, int(q.y.size()), [&](int k) { q.y[k] = -Kf.y[k] * gT.y[k]; });
  return q;
}

}  // namespace transport
}  // namespace prflow
