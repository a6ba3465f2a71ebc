#include "prflow/stepper.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "prflow/errors.hpp"
#include "sparse_ops.hpp"

namespace prflow {

void SchemeConfig::validate() const {
  if (!(dt > 0.0)) throw ValidationError("time step must be positive");
  if (theta < 0.0) throw ValidationError("stabilization weight theta must be >= 0");
  if (lambda < 0.0 || eta < 0.0) throw ValidationError("viscosities must be >= 0");
  if (gravity < 0.0) throw ValidationError("gravity must be >= 0");
  if (!(outer_tol > 0.0) || outer_max < 1) throw ValidationError("invalid outer iteration knobs");
  if (!(inner_newton_tol > 0.0) || inner_newton_max < 1)
    throw ValidationError("invalid inner Newton knobs");
  if (!(T_recovery_tol > 0.0)) throw ValidationError("invalid temperature recovery tolerance");
  if (!(T_min > 0.0) || !(T_max > T_min)) throw ValidationError("invalid temperature bracket");
}

void Problem::validate() const {
  mix.validate(scheme.T_min, scheme.T_max);
  scheme.validate();
  mobility.validate(mix.size());
  if (grid.nx < 2 || grid.ny < 2) throw ValidationError("grid must be at least 2x2");
  if (!(grid.hx > 0.0) || !(grid.hy > 0.0)) throw ValidationError("cell sizes must be positive");
  if (gh.nx != grid.nx || gh.ny != grid.ny)
    throw ValidationError("gravity potential field does not match the grid");
}

namespace stepper {

namespace {

std::vector<double> cell_values(const std::vector<CellField>& n, int idx) {
  std::vector<double> v(n.size());
  for (size_t i = 0; i < n.size(); ++i) v[i] = n[i].v[idx];
  return v;
}

// cheap admissibility scan used by the Newton line searches
bool admissible(const Mixture& mix, const std::vector<CellField>& n) {
  const int m = mix.size();
  std::vector<double> bi(m);
  for (int i = 0; i < m; ++i)
    bi[i] = 0.07780 * mix.R * mix.components[i].Tc / mix.components[i].Pc;
  const int nc = n[0].size();
  for (int idx = 0; idx < nc; ++idx) {
    double B = 0.0;
    for (int i = 0; i < m; ++i) {
      const double ni = n[i].v[idx];
      if (!(ni > 0.0)) return false;
      if (bi[i] * ni >= 1.0 - 2.0 * thermo::kLogDomainMargin) return false;
      B += bi[i] * ni;
    }
    if (B >= 1.0 - 2.0 * thermo::kLogDomainMargin) return false;
  }
  return true;
}

double field_scale(const std::vector<CellField>& n) {
  double s = 0.0;
  for (const CellField& f : n) s = std::max(s, grid::max_abs(f));
  return s;
}

}  // namespace

std::vector<CellField> chemical_potential_fields(const Mixture& mix, const Grid2D& g,
                                                 const std::vector<CellField>& n_new,
                                                 const std::vector<CellField>& n_old,
                                                 const CellField& T_new, double theta, Exec ex) {
  std::vector<CellField> mu = fieldops::mu_bulk_split(mix, n_new, n_old, T_new, theta, ex);
  const std::vector<CellField> lap = grid::div_c_grad(g, mix.cij, n_new, ex);
  for (int i = 0; i < mix.size(); ++i)
    par_for(ex, T_new.size(), [&](int idx) { mu[i].v[idx] -= lap[i].v[idx]; });
  return mu;
}

FaceField intermediate_velocity(const Problem& p, const SimState& state_old,
                                const std::vector<CellField>& mu_new, const CellField& T_new,
                                Exec ex) {
  const Grid2D& g = p.grid;
  const int m = p.mix.size();
  const CellField rho = fieldops::mass_density(p.mix, state_old.n, ex);
  const CellField s_old = fieldops::s_bulk(p.mix, state_old.n, state_old.T, ex);

  const FaceField rho_f = grid::face_avg(g, rho, ex);
  const FaceField s_f = grid::face_avg(g, s_old, ex);
  const FaceField gT = grid::grad(g, T_new, ex);

  std::vector<FaceField> gmu(m), n_f(m);
  for (int i = 0; i < m; ++i) {
    gmu[i] = grid::grad(g, mu_new[i], ex);
    n_f[i] = grid::face_avg(g, state_old.n[i], ex);
  }

  const double dt = p.scheme.dt, grav = p.scheme.gravity;
  const bool periodic = g.bc == BcMode::periodic;
  FaceField us(g);

  par_for(ex, int(us.x.size()), [&](int k) {
    double force = s_f.x[k] * gT.x[k];
    for (int i = 0; i < m; ++i) force += n_f[i].x[k] * gmu[i].x[k];
    us.x[k] = state_old.u.x[k] - dt * force / rho_f.x[k];  // gravity acts along -y only
  });
  par_for(ex, int(us.y.size()), [&](int k) {
    double force = s_f.y[k] * gT.y[k];
    for (int i = 0; i < m; ++i) force += n_f[i].y[k] * gmu[i].y[k];
    us.y[k] = state_old.u.y[k] - dt * force / rho_f.y[k] - dt * grav;
  });

  if (!periodic) {
    // no-penetration boundary
    for (int j = 0; j < g.ny; ++j) us.fx(0, j) = us.fx(g.nx, j) = 0.0;
    for (int i = 0; i < g.nx; ++i) us.fy(i, 0) = us.fy(i, g.ny) = 0.0;
  } else {
    for (int j = 0; j < g.ny; ++j) us.fx(g.nx, j) = us.fx(0, j);
    for (int i = 0; i < g.nx; ++i) us.fy(i, g.ny) = us.fy(i, 0);
  }
  return us;
}

std::vector<CellField> solve_mass(const Grid2D& g, const std::vector<CellField>& n_old,
                                  const FaceField& u_star, const std::vector<FaceField>& J_new,
                                  double dt, Exec ex) {
  const int m = int(n_old.size());
  std::vector<CellField> out(m, CellField(g));
  for (int i = 0; i < m; ++i) {
    const CellField adv = grid::upwind_div(g, u_star, n_old[i], ex);
    const CellField dif = grid::div(g, J_new[i], ex);
    par_for(ex, g.cells(), [&](int idx) {
      out[i].v[idx] = n_old[i].v[idx] - dt * (adv.v[idx] + dif.v[idx]);
    });
  }
  return out;
}

CellField recover_temperature(const Problem& p, const CellField& e_t,
                              const std::vector<CellField>& n_new, const FaceField& u_new,
                              const CellField& rho_new, const CellField* T_init, Exec ex) {
  const Grid2D& g = p.grid;
  const int m = p.mix.size();
  const CellField fgrad = fieldops::gradient_energy(p.mix, g, n_new, ex);
  const CellField kin = fieldops::kinetic_energy(g, rho_new, u_new, ex);
  const double Tlo = p.scheme.T_min, Thi = p.scheme.T_max;
  const double rtol = p.scheme.T_recovery_tol;

  CellField T(g);
  std::atomic<int> bad{-1};
  par_for(ex, g.cells(), [&](int idx) {
    thread_local std::vector<double> nn;
    nn.resize(m);
    for (int i = 0; i < m; ++i) nn[i] = n_new[i].v[idx];
    const double target =
        e_t.v[idx] - fgrad.v[idx] - kin.v[idx] - rho_new.v[idx] * p.gh.v[idx];

    double lo = Tlo, hi = Thi;
    const double ulo = thermo::u_internal_bulk_raw(p.mix, nn.data(), lo);
    const double uhi = thermo::u_internal_bulk_raw(p.mix, nn.data(), hi);
    if (target < ulo || target > uhi) {
      bad.store(idx);
      return;
    }
    double t = T_init ? T_init->v[idx] : 0.5 * (lo + hi);
    t = std::min(std::max(t, lo), hi);
    for (int it = 0; it < 100; ++it) {
      const double r = thermo::u_internal_bulk_raw(p.mix, nn.data(), t) - target;
      if (r > 0.0)
        hi = t;
      else
        lo = t;
      const double cv = thermo::du_dT_bulk(p.mix, nn.data(), t);
      double tn = t - r / cv;
      if (!(tn > lo) || !(tn < hi)) tn = 0.5 * (lo + hi);  // bisection safeguard
      const double dt_abs = std::abs(tn - t);
      t = tn;
      if (dt_abs <= rtol * t && std::abs(r) <= 1e-12 * std::max(std::abs(target), 1.0)) break;
    }
    T.v[idx] = t;
  });
  if (bad.load() >= 0) {
    std::ostringstream os;
    os << "temperature recovery: no root in [" << Tlo << ", " << Thi << "] K at cell ("
       << bad.load() % g.nx << ", " << bad.load() / g.nx << ")";
    throw SolverError(os.str());
  }
  return T;
}

CellField total_energy_density(const Problem& p, const SimState& s, Exec ex) {
  const Grid2D& g = p.grid;
  const CellField rho = fieldops::mass_density(p.mix, s.n, ex);
  const CellField ub = fieldops::u_internal(p.mix, s.n, s.T, ex);
  const CellField fgrad = fieldops::gradient_energy(p.mix, g, s.n, ex);
  const CellField kin = fieldops::kinetic_energy(g, rho, s.u, ex);
  CellField e(g);
  par_for(ex, g.cells(), [&](int idx) {
    e.v[idx] = ub.v[idx] + fgrad.v[idx] + kin.v[idx] + rho.v[idx] * p.gh.v[idx];
  });
  return e;
}

CellField energy_update(const Problem& p, const SimState& state_old,
                        const std::vector<CellField>& n_new, const CellField& T_new,
                        const FaceField& u_new, const FaceField& u_star,
                        const std::vector<CellField>& mu_new, const FaceField& q_new,
                        const std::vector<FaceField>& J_new, Exec ex) {
  const Grid2D& g = p.grid;
  const int m = p.mix.size();
  const double dt = p.scheme.dt;

  const CellField e_old = total_energy_density(p, state_old, ex);
  const CellField rho_old = fieldops::mass_density(p.mix, state_old.n, ex);
  const CellField s_old = fieldops::s_bulk(p.mix, state_old.n, state_old.T, ex);
  const CellField fb_new = fieldops::f_bulk(p.mix, n_new, T_new, ex);
  const CellField fgrad_new = fieldops::gradient_energy(p.mix, g, n_new, ex);
  const CellField kin_star = fieldops::kinetic_energy(g, rho_old, u_new, ex);

  // advected scalar: intermediate total energy plus pressure
  CellField etsp(g);
  par_for(ex, g.cells(), [&](int idx) {
    const double f_new = fb_new.v[idx] + fgrad_new.v[idx];
    const double et_star = f_new + T_new.v[idx] * s_old.v[idx] + kin_star.v[idx] +
                           rho_old.v[idx] * p.gh.v[idx];
    double press = -f_new;
    for (int i = 0; i < m; ++i) press += state_old.n[i].v[idx] * mu_new[i].v[idx];
    etsp.v[idx] = et_star + press;
  });
  const CellField adv = grid::upwind_div(g, u_star, etsp, ex);

  // pi flux: interfacial energy transport minus kinetic carried by diffusion
  FaceField pi(g);
  {
    const CellField u2 = grid::dot_faces(g, u_new, u_new, ex);
    const FaceField u2_f = grid::face_avg(g, u2, ex);
    std::vector<FaceField> gn(m), rate_f(m);
    for (int j = 0; j < m; ++j) {
      gn[j] = grid::grad(g, n_new[j], ex);
      CellField rate(g);
      par_for(ex, g.cells(), [&](int idx) {
        rate.v[idx] = (n_new[j].v[idx] - state_old.n[j].v[idx]) / dt;
      });
      rate_f[j] = grid::face_avg(g, rate, ex);
    }
    par_for(ex, int(pi.x.size()), [&](int k) {
      double v = 0.0;
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) v += p.mix.c(i, j) * rate_f[i].x[k] * gn[j].x[k];
        v -= 0.5 * p.mix.components[i].Mw * u2_f.x[k] * J_new[i].x[k];
      }
      pi.x[k] = v;
    });
    par_for(ex, int(pi.y.size()), [&](int k) {
      double v = 0.0;
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) v += p.mix.c(i, j) * rate_f[i].y[k] * gn[j].y[k];
        v -= 0.5 * p.mix.components[i].Mw * u2_f.y[k] * J_new[i].y[k];
      }
      pi.y[k] = v;
    });
  }

  const FaceField tau_u = stress_dot_velocity(p, u_new);
  FaceField flux(g);  // q - pi - tau.u, diverged together
  par_for(ex, int(flux.x.size()), [&](int k) { flux.x[k] = q_new.x[k] - pi.x[k] - tau_u.x[k]; });
  par_for(ex, int(flux.y.size()), [&](int k) { flux.y[k] = q_new.y[k] - pi.y[k] - tau_u.y[k]; });
  const CellField dflux = grid::div(g, flux, ex);

  CellField e_new(g);
  par_for(ex, g.cells(), [&](int idx) {
    e_new.v[idx] = e_old.v[idx] - dt * (adv.v[idx] + dflux.v[idx]);
  });
  return e_new;
}

// ---------------------------------------------------------------------------
// step(): outer fixed-point iteration with implicit mass and energy sub-solves
// ---------------------------------------------------------------------------

namespace {

using ops::SpMat;

struct MassSolveResult {
  std::vector<CellField> n;
  std::vector<CellField> mu;
  std::vector<FaceField> J;
  FaceField u_star;
  double residual = 0.0;
  int iters = 0;
};

// Implicit solve of the coupled mass update (4.5)-(4.8) at fixed temperature:
// Newton on G(n) = n - n_old + dt [div(u*(n) n_old)_up + div J(n)] with the
// exact Jacobian (convex bulk Hessian, interfacial term, diffusive and
// intermediate-velocity couplings).
class MassNewton {
 public:
  MassNewton(const Problem& p, const SimState& old_state)
      : p_(p), g_(p.grid), m_(p.mix.size()), old_(old_state) {
    Div_ = ops::build_div(g_);
    Grad_ = ops::build_grad(g_);
    DG_ = Div_ * Grad_;

    rho_old_ = fieldops::mass_density(p.mix, old_state.n);
    const FaceField rho_f = grid::face_avg(g_, rho_old_);
    rho_f_ = ops::face_flat(g_, rho_f);
    for (int i = 0; i < m_; ++i) {
      nf_.push_back(ops::face_flat(g_, grid::face_avg(g_, old_state.n[i])));
    }
    // lagged mobility entries, face averaged
    const int nc = g_.cells();
    std::vector<double> Lc(size_t(nc) * m_ * m_);
    for (int idx = 0; idx < nc; ++idx) {
      const std::vector<double> ncell = cell_values(old_state.n, idx);
      transport::mobility_into(p.mobility, p.mix, ncell.data(), &Lc[size_t(idx) * m_ * m_]);
    }
    Lf_.assign(size_t(m_) * m_, std::vector<double>(ops::nfaces(g_), 0.0));
    const bool periodic = g_.bc == BcMode::periodic;
    for (int j = 0; j < g_.ny; ++j)
      for (int i = 0; i <= g_.nx; ++i) {
        int cl = i - 1, cr = i;
        if (i == 0 || i == g_.nx) {
          if (!periodic) continue;
          cl = g_.nx - 1;
          cr = 0;
        }
        const int ca = j * g_.nx + cl, cb = j * g_.nx + cr;
        for (int a = 0; a < m_ * m_; ++a)
          Lf_[a][ops::xface_id(g_, i, j)] =
              0.5 * (Lc[size_t(ca) * m_ * m_ + a] + Lc[size_t(cb) * m_ * m_ + a]);
      }
    for (int j = 0; j <= g_.ny; ++j)
      for (int i = 0; i < g_.nx; ++i) {
        int cb_j = j - 1, ct_j = j;
        if (j == 0 || j == g_.ny) {
          if (!periodic) continue;
          cb_j = g_.ny - 1;
          ct_j = 0;
        }
        const int ca = cb_j * g_.nx + i, cb = ct_j * g_.nx + i;
        for (int a = 0; a < m_ * m_; ++a)
          Lf_[a][ops::yface_id(g_, i, j)] =
              0.5 * (Lc[size_t(ca) * m_ * m_ + a] + Lc[size_t(cb) * m_ * m_ + a]);
      }
  }

  MassSolveResult solve(const std::vector<CellField>& n_init, const CellField& T_m) {
    const double dt = p_.scheme.dt;
    const double nscale = field_scale(old_.n);
    MassSolveResult r;
    std::vector<CellField> n_cur = n_init;

    for (int it = 0; it <= p_.scheme.inner_newton_max; ++it) {
      r.mu = chemical_potential_fields(p_.mix, g_, n_cur, old_.n, T_m, p_.scheme.theta);
      r.J = transport::diffusion_fluxes(p_.mobility, p_.mix, g_, old_.n, old_.T, r.mu, T_m,
                                        p_.gh);
      r.u_star = intermediate_velocity(p_, old_, r.mu, T_m);
      r.n = solve_mass(g_, old_.n, r.u_star, r.J, dt);

      double res = 0.0;
      for (int i = 0; i < m_; ++i) res = std::max(res, grid::max_abs_diff(n_cur[i], r.n[i]));
      r.residual = res / nscale;
      r.iters = it;
      if (r.residual <= p_.scheme.inner_newton_tol) return r;
      if (it == p_.scheme.inner_newton_max) break;

      // Newton correction
      const SpMat jac = assemble_jacobian(n_cur, T_m, r.u_star);
      Eigen::VectorXd rhs(m_ * g_.cells());
      for (int i = 0; i < m_; ++i)
        for (int idx = 0; idx < g_.cells(); ++idx)
          rhs[i * g_.cells() + idx] = r.n[i].v[idx] - n_cur[i].v[idx];  // -G
      Eigen::SparseLU<SpMat> lu(jac);
      if (lu.info() != Eigen::Success)
        throw SolverError("mass sub-solve: Jacobian factorization failed");
      Eigen::VectorXd dx = lu.solve(rhs);

      double step = 1.0;
      for (int bt = 0; bt < 40; ++bt) {
        std::vector<CellField> trial = n_cur;
        for (int i = 0; i < m_; ++i)
          for (int idx = 0; idx < g_.cells(); ++idx)
            trial[i].v[idx] += step * dx[i * g_.cells() + idx];
        if (admissible(p_.mix, trial)) {
          n_cur = std::move(trial);
          break;
        }
        step *= 0.5;
        if (bt == 39)
          throw SolverError(
              "mass sub-solve left the admissible domain; a smaller time step may be needed");
      }
    }
    std::ostringstream os;
    os << "mass sub-solve did not converge: relative residual " << r.residual << " after "
       << p_.scheme.inner_newton_max << " Newton iterations";
    throw SolverError(os.str());
  }

 private:
  SpMat assemble_jacobian(const std::vector<CellField>& n_cur, const CellField& T_m,
                          const FaceField& u_star) {
    const int nc = g_.cells();
    const int nf = ops::nfaces(g_);
    const double dt = p_.scheme.dt;

    // convex Hessian per cell
    std::vector<double> hes(size_t(nc) * m_ * m_);
    for (int idx = 0; idx < nc; ++idx) {
      const std::vector<double> ncell = cell_values(n_cur, idx);
      thermo::convex_hessian_into(p_.mix, ncell.data(), T_m.v[idx], p_.scheme.theta,
                                  &hes[size_t(idx) * m_ * m_]);
    }

    // donor upwind values of n_old on faces, by sign of u*
    const bool periodic = g_.bc == BcMode::periodic;
    std::vector<std::vector<double>> ndon(m_, std::vector<double>(nf, 0.0));
    for (int i = 0; i < m_; ++i) {
      const CellField& f = old_.n[i];
      for (int j = 0; j < g_.ny; ++j)
        for (int ii = 0; ii <= g_.nx; ++ii) {
          int idon = (u_star.fx(ii, j) > 0.0) ? ii - 1 : ii;
          if (idon < 0) idon = periodic ? g_.nx - 1 : 0;
          if (idon > g_.nx - 1) idon = periodic ? 0 : g_.nx - 1;
          ndon[i][ops::xface_id(g_, ii, j)] = f(idon, j);
        }
      for (int j = 0; j <= g_.ny; ++j)
        for (int ii = 0; ii < g_.nx; ++ii) {
          int jdon = (u_star.fy(ii, j) > 0.0) ? j - 1 : j;
          if (jdon < 0) jdon = periodic ? g_.ny - 1 : 0;
          if (jdon > g_.ny - 1) jdon = periodic ? 0 : g_.ny - 1;
          ndon[i][ops::yface_id(g_, ii, j)] = f(ii, jdon);
        }
    }

    std::vector<double> invT(nc);
    for (int idx = 0; idx < nc; ++idx) invT[idx] = 1.0 / T_m.v[idx];
    const SpMat invT_diag = ops::cell_diag(invT);

    // big dmu/dn operator: blocks H_jl + c_jl (-DG)
    std::vector<Eigen::Triplet<double>> pt;
    pt.reserve(size_t(m_) * m_ * (nc + DG_.nonZeros()));
    for (int j = 0; j < m_; ++j)
      for (int l = 0; l < m_; ++l) {
        for (int idx = 0; idx < nc; ++idx)
          pt.emplace_back(j * nc + idx, l * nc + idx, hes[size_t(idx) * m_ * m_ + j * m_ + l]);
        const double cjl = p_.mix.c(j, l);
        if (cjl != 0.0)
          for (int k = 0; k < DG_.outerSize(); ++k)
            for (SpMat::InnerIterator itr(DG_, k); itr; ++itr)
              pt.emplace_back(j * nc + itr.row(), l * nc + itr.col(), -cjl * itr.value());
      }
    SpMat bigP(m_ * nc, m_ * nc);
    bigP.setFromTriplets(pt.begin(), pt.end());

    // big flux-response operator: blocks -(Div W_adv Grad + Div L Grad invT)
    std::vector<Eigen::Triplet<double>> kt;
    std::vector<double> w(nf);
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j) {
        for (int k = 0; k < nf; ++k)
          w[k] = dt * ndon[i][k] * nf_[j][k] / rho_f_[k];
        SpMat kij = Div_ * ops::face_diag(g_, w) * Grad_;
        kij += Div_ * ops::face_diag(g_, Lf_[size_t(i) * m_ + j]) * Grad_ * invT_diag;
        for (int k = 0; k < kij.outerSize(); ++k)
          for (SpMat::InnerIterator itr(kij, k); itr; ++itr)
            kt.emplace_back(i * nc + itr.row(), j * nc + itr.col(), -itr.value());
      }
    SpMat bigK(m_ * nc, m_ * nc);
    bigK.setFromTriplets(kt.begin(), kt.end());

    SpMat jac = (dt * bigK * bigP).pruned();
    SpMat eye(m_ * nc, m_ * nc);
    eye.setIdentity();
    jac = SpMat(eye + jac);
    jac.makeCompressed();
    return jac;
  }

  const Problem& p_;
  const Grid2D& g_;
  int m_;
  const SimState& old_;
  SpMat Div_, Grad_, DG_;
  CellField rho_old_;
  std::vector<double> rho_f_;
  std::vector<std::vector<double>> nf_;  // face-averaged old densities
  std::vector<std::vector<double>> Lf_;  // face-averaged mobility entries
};

struct EnergySolveResult {
  CellField T;
  CellField e_t;
  double residual = 0.0;
};

// Implicit heat-conduction closure: find T with
//   theta_b(n_new, T) + f_grad + kin + pot = E_noq - dt div(q(T)),
// Newton with the SPD matrix diag(du/dT) - dt Div diag(K) Grad.
EnergySolveResult energy_newton(const Problem& p, const std::vector<CellField>& n_old,
                                const std::vector<CellField>& n_new, const FaceField& u_new,
                                const CellField& E_noq, const CellField& T_init,
                                double scale_e) {
  const Grid2D& g = p.grid;
  const int m = p.mix.size();
  const int nc = g.cells();
  const double dt = p.scheme.dt;

  const CellField rho_new = fieldops::mass_density(p.mix, n_new);
  const CellField fgrad = fieldops::gradient_energy(p.mix, g, n_new);
  const CellField kin = fieldops::kinetic_energy(g, rho_new, u_new);

  // fixed part of the closure
  CellField fixed(g);
  par_for(nc, [&](int idx) {
    fixed.v[idx] =
        fgrad.v[idx] + kin.v[idx] + rho_new.v[idx] * p.gh.v[idx] - E_noq.v[idx];
  });

  const SpMat Div = ops::build_div(g);
  const SpMat Grad = ops::build_grad(g);
  CellField Kcell(g);
  par_for(nc, [&](int idx) {
    double ntot = 0.0;
    for (int i = 0; i < m; ++i) ntot += n_old[i].v[idx];
    Kcell.v[idx] = p.mobility.kappa0 * ntot;
  });
  const FaceField Kf = grid::face_avg(g, Kcell);
  const SpMat cond = Div * ops::face_diag(g, ops::face_flat(g, Kf)) * Grad;  // NSD

  CellField T = T_init;
  const double tol_abs = 1e-13 * scale_e;
  EnergySolveResult r;

  for (int it = 0; it <= p.scheme.inner_newton_max; ++it) {
    const FaceField q = transport::heat_flux(p.mobility, g, n_old, T);
    const CellField divq = grid::div(g, q);
    Eigen::VectorXd G(nc);
    for (int idx = 0; idx < nc; ++idx) {
      std::vector<double> nn = cell_values(n_new, idx);
      G[idx] = thermo::u_internal_bulk_raw(p.mix, nn.data(), T.v[idx]) + fixed.v[idx] +
               dt * divq.v[idx];
    }
    r.residual = G.cwiseAbs().maxCoeff();
    if (r.residual <= tol_abs || it == p.scheme.inner_newton_max) {
      if (r.residual > 1e-10 * scale_e) {
        std::ostringstream os;
        os << "energy sub-solve did not converge: residual " << r.residual << " vs scale "
           << scale_e;
        throw SolverError(os.str());
      }
      r.T = T;
      r.e_t = CellField(g);
      par_for(nc, [&](int idx) { r.e_t.v[idx] = E_noq.v[idx] - dt * divq.v[idx]; });
      return r;
    }

    std::vector<double> cv(nc);
    for (int idx = 0; idx < nc; ++idx) {
      std::vector<double> nn = cell_values(n_new, idx);
      cv[idx] = thermo::du_dT_bulk(p.mix, nn.data(), T.v[idx]);
    }
    SpMat A = SpMat(ops::cell_diag(cv) - dt * cond);
    A.makeCompressed();
    Eigen::SparseLU<SpMat> lu(A);
    if (lu.info() != Eigen::Success)
      throw SolverError("energy sub-solve: factorization failed");
    const Eigen::VectorXd dT = lu.solve(-G);

    double step = 1.0;
    for (int bt = 0; bt < 40; ++bt) {
      bool ok = true;
      for (int idx = 0; idx < nc && ok; ++idx) {
        const double t = T.v[idx] + step * dT[idx];
        ok = (t > p.scheme.T_min && t < p.scheme.T_max);
      }
      if (ok) break;
      step *= 0.5;
      if (bt == 39)
        throw SolverError("energy sub-solve left the temperature bracket");
    }
    for (int idx = 0; idx < nc; ++idx) T.v[idx] += step * dT[idx];
  }
  throw SolverError("energy sub-solve did not converge");
}

}  // namespace

std::pair<SimState, StepReport> step(const Problem& p, const SimState& state) {
  const Grid2D& g = p.grid;
  const int m = p.mix.size();
  const double dt = p.scheme.dt;

  fieldops::check_fields(p.mix, state.n, state.T);

  const CellField e_old = total_energy_density(p, state);
  const double scale_e = std::max(grid::max_abs(e_old), 1e-300);
  const double nscale = field_scale(state.n);
  const double Tscale = grid::max_abs(state.T);
  const double u_floor = 1e-9 * std::max(g.hx, g.hy) / dt;

  MassNewton mass(p, state);

  std::vector<CellField> n_cur = state.n;
  CellField T_cur = state.T;
  FaceField u_cur = state.u;
  CellField e_t_new = e_old;
  MassSolveResult mr;

  StepReport rep;
  for (int it = 1; it <= p.scheme.outer_max; ++it) {
    rep.outer_iters = it;

    mr = mass.solve(n_cur, T_cur);
    const CellField rho_old = fieldops::mass_density(p.mix, state.n);
    const FaceField u_new = solve_momentum(p, mr.u_star, mr.J, rho_old);

    const CellField E_noq = energy_update(p, state, mr.n, T_cur, u_new, mr.u_star, mr.mu,
                                          FaceField(g), mr.J);
    const EnergySolveResult er = energy_newton(p, state.n, mr.n, u_new, E_noq, T_cur, scale_e);

    double dn = 0.0;
    for (int i = 0; i < m; ++i) dn = std::max(dn, grid::max_abs_diff(n_cur[i], mr.n[i]));
    dn /= nscale;
    const double dT = grid::max_abs_diff(T_cur, er.T) / Tscale;
    const double uden =
        std::max({grid::max_abs(u_cur), grid::max_abs(u_new), u_floor});
    const double du = grid::max_abs_diff(u_cur, u_new) / uden;

    n_cur = mr.n;
    T_cur = er.T;
    u_cur = u_new;
    e_t_new = er.e_t;

    if (std::max({dn, dT, du}) < p.scheme.outer_tol) {
      rep.converged = true;
      break;
    }
  }
  if (!rep.converged)
    throw SolverError("time step did not converge within the outer iteration limit");

  SimState out;
  out.n = n_cur;
  out.T = T_cur;
  out.u = u_cur;
  out.t = state.t + dt;

  // residuals of the discrete equations at the accepted state
  {
    const std::vector<CellField> mu =
        chemical_potential_fields(p.mix, g, out.n, state.n, out.T, p.scheme.theta);
    const std::vector<FaceField> J =
        transport::diffusion_fluxes(p.mobility, p.mix, g, state.n, state.T, mu, out.T, p.gh);
    const FaceField us = intermediate_velocity(p, state, mu, out.T);
    const std::vector<CellField> n_chk = solve_mass(g, state.n, us, J, dt);
    for (int i = 0; i < m; ++i)
      rep.res_mass = std::max(rep.res_mass, grid::max_abs_diff(out.n[i], n_chk[i]));
    rep.res_mass /= nscale;

    const FaceField q = transport::heat_flux(p.mobility, g, state.n, out.T);
    const CellField e_chk = energy_update(p, state, out.n, out.T, out.u, us, mu, q, J);
    rep.res_energy = grid::max_abs_diff(e_t_new, e_chk) / scale_e;

    const CellField et_state = total_energy_density(p, out);
    rep.res_T = grid::max_abs_diff(et_state, e_t_new) / scale_e;
  }

  const CellField s_new = fieldops::s_bulk(p.mix, out.n, out.T);
  rep.entropy = grid::integrate(g, s_new);
  rep.energy = grid::integrate(g, e_t_new);
  rep.moles.resize(m);
  for (int i = 0; i < m; ++i) rep.moles[i] = grid::integrate(g, out.n[i]);
  return {std::move(out), std::move(rep)};
}

}  // namespace stepper
}  // namespace prflow
