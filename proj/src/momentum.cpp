#include <cmath>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "prflow/errors.hpp"
#include "prflow/stepper.hpp"

namespace prflow::stepper {

namespace {

// Unknown numbering for the implicit momentum solve. Boundary-normal faces
// are fixed at zero under Neumann (no-penetration); under periodic boundaries
// the wrapped faces alias one unknown.
struct VelIndex {
  int nx, ny;
  bool periodic;
  int nxu, nunk;

  explicit VelIndex(const Grid2D& g)
      : nx(g.nx), ny(g.ny), periodic(g.bc == BcMode::periodic) {
    nxu = periodic ? nx * ny : (nx - 1) * ny;
    nunk = nxu + (periodic ? nx * ny : nx * (ny - 1));
  }

  // x-face (i,j) with j wrapped; returns -1 for a known-zero boundary face
  int x(int i, int j) const {
    if (periodic) {
      i = (i % nx + nx) % nx;
      j = (j % ny + ny) % ny;
      return j * nx + i;
    }
    if (i <= 0 || i >= nx) return -1;
    return j * (nx - 1) + (i - 1);
  }
  int y(int i, int j) const {
    if (periodic) {
      i = (i % nx + nx) % nx;
      j = (j % ny + ny) % ny;
      return nxu + j * nx + i;
    }
    if (j <= 0 || j >= ny) return -1;
    return nxu + (j - 1) * nx + i;
  }
};

struct Assembler {
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs;

  explicit Assembler(int n) : rhs(Eigen::VectorXd::Zero(n)) {}
  void add(int row, int col, double c) {
    if (col >= 0 && c != 0.0) trip.emplace_back(row, col, c);
  }
};

double cell_wrap(const CellField& f, int nx, int ny, int i, int j, bool periodic) {
  if (periodic) {
    i = (i % nx + nx) % nx;
    j = (j % ny + ny) % ny;
  }
  return f(i, j);
}

// mean of the four tangential faces surrounding a normal face
double quad_avg_y(const FaceField& f, int nx, int i, int j, bool periodic) {
  int il = i - 1;
  if (il < 0) il = periodic ? nx - 1 : 0;  // Neumann: never hit (interior faces only)
  return 0.25 * (f.fy(il, j) + f.fy(i, j) + f.fy(il, j + 1) + f.fy(i, j + 1));
}
double quad_avg_x(const FaceField& f, int ny, int i, int j, bool periodic) {
  int jb = j - 1;
  if (jb < 0) jb = periodic ? ny - 1 : 0;
  return 0.25 * (f.fx(i, jb) + f.fx(i + 1, jb) + f.fx(i, j) + f.fx(i + 1, j));
}

FaceField mass_flux_sum(const Mixture& mix, const Grid2D& g,
                        const std::vector<FaceField>& J) {
  FaceField jm(g);
  for (int a = 0; a < mix.size(); ++a) {
    const double mw = mix.components[a].Mw;
    for (size_t k = 0; k < jm.x.size(); ++k) jm.x[k] += mw * J[a].x[k];
    for (size_t k = 0; k < jm.y.size(); ++k) jm.y[k] += mw * J[a].y[k];
  }
  return jm;
}

}  // namespace

FaceField solve_momentum(const Problem& p, const FaceField& u_star,
                         const std::vector<FaceField>& J_new, const CellField& rho_old) {
  const Grid2D& g = p.grid;
  const int nx = g.nx, ny = g.ny;
  const bool periodic = g.bc == BcMode::periodic;
  const double dt = p.scheme.dt, hx = g.hx, hy = g.hy;
  const double lam = p.scheme.lambda, eta = p.scheme.eta;
  const bool viscous = (lam != 0.0 || eta != 0.0);
  const VelIndex vi(g);

  const FaceField jm = mass_flux_sum(p.mix, g, J_new);
  Assembler as(vi.nunk);
  as.trip.reserve(size_t(vi.nunk) * 8);

  // ---- x-momentum rows ----
  for (int j = 0; j < ny; ++j) {
    for (int i = periodic ? 0 : 1; i <= nx - 1; ++i) {
      const int row = vi.x(i, j);
      const double rho_f = 0.5 * (cell_wrap(rho_old, nx, ny, i - 1, j, periodic) +
                                  cell_wrap(rho_old, nx, ny, i, j, periodic));
      const double wx = rho_f * u_star.fx(i, j) + jm.fx(i, j);
      const double wy =
          rho_f * quad_avg_y(u_star, nx, i, j, periodic) + quad_avg_y(jm, nx, i, j, periodic);

      as.add(row, row, rho_f / dt);
      as.rhs[row] += rho_f * u_star.fx(i, j) / dt;

      // upwind advection in x (normal direction: boundary faces are known zeros)
      if (wx > 0.0) {
        as.add(row, row, wx / hx);
        as.add(row, vi.x(i - 1, j), -wx / hx);
      } else if (wx < 0.0) {
        as.add(row, row, -wx / hx);
        as.add(row, vi.x(i + 1, j), wx / hx);
      }
      // upwind advection in y (tangential: free-slip ghost kills the term at walls)
      if (wy > 0.0) {
        if (periodic || j - 1 >= 0) {
          as.add(row, row, wy / hy);
          as.add(row, vi.x(i, j - 1), -wy / hy);
        }
      } else if (wy < 0.0) {
        if (periodic || j + 1 <= ny - 1) {
          as.add(row, row, -wy / hy);
          as.add(row, vi.x(i, j + 1), wy / hy);
        }
      }

      if (viscous) {
        // -(d tau_xx/dx + d tau_xy/dy), coefficients negated into the row
        const double cxx = (lam + 2.0 * eta) / (hx * hx);
        const double cl = lam / (hx * hy);
        // tau_xx(i,j) part
        as.add(row, vi.x(i + 1, j), -cxx);
        as.add(row, row, cxx);
        as.add(row, vi.y(i, j + 1), -cl);
        as.add(row, vi.y(i, j), cl);
        // -tau_xx(i-1,j) part
        as.add(row, row, cxx);
        as.add(row, vi.x(i - 1, j), -cxx);
        as.add(row, vi.y(i - 1, j + 1), cl);
        as.add(row, vi.y(i - 1, j), -cl);
        // tau_xy nodes (i, j+1) and (i, j); skipped where free slip zeroes them
        const bool top_node = periodic || (j + 1 < ny);
        const bool bot_node = periodic || (j > 0);
        if (top_node) {
          as.add(row, vi.x(i, j + 1), -eta / (hy * hy));
          as.add(row, row, eta / (hy * hy));
          as.add(row, vi.y(i, j + 1), -eta / (hx * hy));
          as.add(row, vi.y(i - 1, j + 1), eta / (hx * hy));
        }
        if (bot_node) {
          as.add(row, row, eta / (hy * hy));
          as.add(row, vi.x(i, j - 1), -eta / (hy * hy));
          as.add(row, vi.y(i, j), eta / (hx * hy));
          as.add(row, vi.y(i - 1, j), -eta / (hx * hy));
        }
      }
    }
  }

  // ---- y-momentum rows ----
  for (int j = periodic ? 0 : 1; j <= ny - 1; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int row = vi.y(i, j);
      const double rho_f = 0.5 * (cell_wrap(rho_old, nx, ny, i, j - 1, periodic) +
                                  cell_wrap(rho_old, nx, ny, i, j, periodic));
      const double wy = rho_f * u_star.fy(i, j) + jm.fy(i, j);
      const double wx =
          rho_f * quad_avg_x(u_star, ny, i, j, periodic) + quad_avg_x(jm, ny, i, j, periodic);

      as.add(row, row, rho_f / dt);
      as.rhs[row] += rho_f * u_star.fy(i, j) / dt;

      if (wy > 0.0) {
        as.add(row, row, wy / hy);
        as.add(row, vi.y(i, j - 1), -wy / hy);
      } else if (wy < 0.0) {
        as.add(row, row, -wy / hy);
        as.add(row, vi.y(i, j + 1), wy / hy);
      }
      if (wx > 0.0) {
        if (periodic || i - 1 >= 0) {
          as.add(row, row, wx / hx);
          as.add(row, vi.y(i - 1, j), -wx / hx);
        }
      } else if (wx < 0.0) {
        if (periodic || i + 1 <= nx - 1) {
          as.add(row, row, -wx / hx);
          as.add(row, vi.y(i + 1, j), wx / hx);
        }
      }

      if (viscous) {
        const double cyy = (lam + 2.0 * eta) / (hy * hy);
        const double cl = lam / (hx * hy);
        // tau_yy(i,j) part
        as.add(row, vi.y(i, j + 1), -cyy);
        as.add(row, row, cyy);
        as.add(row, vi.x(i + 1, j), -cl);
        as.add(row, vi.x(i, j), cl);
        // -tau_yy(i,j-1) part
        as.add(row, row, cyy);
        as.add(row, vi.y(i, j - 1), -cyy);
        as.add(row, vi.x(i + 1, j - 1), cl);
        as.add(row, vi.x(i, j - 1), -cl);
        // tau_xy nodes (i+1, j) and (i, j)
        const bool right_node = periodic || (i + 1 < nx);
        const bool left_node = periodic || (i > 0);
        if (right_node) {
          as.add(row, vi.y(i + 1, j), -eta / (hx * hx));
          as.add(row, row, eta / (hx * hx));
          as.add(row, vi.x(i + 1, j), -eta / (hx * hy));
          as.add(row, vi.x(i + 1, j - 1), eta / (hx * hy));
        }
        if (left_node) {
          as.add(row, row, eta / (hx * hx));
          as.add(row, vi.y(i - 1, j), -eta / (hx * hx));
          as.add(row, vi.x(i, j), eta / (hx * hy));
          as.add(row, vi.x(i, j - 1), -eta / (hx * hy));
        }
      }
    }
  }

  Eigen::SparseMatrix<double> A(vi.nunk, vi.nunk);
  A.setFromTriplets(as.trip.begin(), as.trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw SolverError("momentum system factorization failed");
  const Eigen::VectorXd sol = lu.solve(as.rhs);
  if (lu.info() != Eigen::Success) throw SolverError("momentum system solve failed");

  FaceField u(g);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const int id = vi.x(i, j);
      u.fx(i, j) = (id >= 0) ? sol[id] : 0.0;
    }
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int id = vi.y(i, j);
      u.fy(i, j) = (id >= 0) ? sol[id] : 0.0;
    }
  return u;
}

FaceField momentum_residual(const Problem& p, const FaceField& u_new, const FaceField& u_star,
                            const std::vector<FaceField>& J_new, const CellField& rho_old) {
  const Grid2D& g = p.grid;
  const int nx = g.nx, ny = g.ny;
  const bool periodic = g.bc == BcMode::periodic;
  const double dt = p.scheme.dt, hx = g.hx, hy = g.hy;
  const double lam = p.scheme.lambda, eta = p.scheme.eta;
  const FaceField jm = mass_flux_sum(p.mix, g, J_new);

  auto ux = [&](int i, int j) {
    if (periodic) {
      i = (i % nx + nx) % nx;
      j = (j % ny + ny) % ny;
      return u_new.fx(i, j);
    }
    if (i <= 0 || i >= nx) return 0.0;
    if (j < 0 || j >= ny) return u_new.fx(i, std::min(std::max(j, 0), ny - 1));  // free slip
    return u_new.fx(i, j);
  };
  auto uy = [&](int i, int j) {
    if (periodic) {
      i = (i % nx + nx) % nx;
      j = (j % ny + ny) % ny;
      return u_new.fy(i, j);
    }
    if (j <= 0 || j >= ny) return 0.0;
    if (i < 0 || i >= nx) return u_new.fy(std::min(std::max(i, 0), nx - 1), j);
    return u_new.fy(i, j);
  };
  // tau components; zero at Neumann boundary nodes (free slip)
  auto tau_xx = [&](int ci, int cj) {
    return (lam + 2.0 * eta) * (ux(ci + 1, cj) - ux(ci, cj)) / hx +
           lam * (uy(ci, cj + 1) - uy(ci, cj)) / hy;
  };
  auto tau_yy = [&](int ci, int cj) {
    return (lam + 2.0 * eta) * (uy(ci, cj + 1) - uy(ci, cj)) / hy +
           lam * (ux(ci + 1, cj) - ux(ci, cj)) / hx;
  };
  auto tau_xy = [&](int i, int j) {
    if (!periodic && (i <= 0 || i >= nx || j <= 0 || j >= ny)) return 0.0;
    return eta * ((ux(i, j) - ux(i, j - 1)) / hy + (uy(i, j) - uy(i - 1, j)) / hx);
  };

  FaceField res(g);
  for (int j = 0; j < ny; ++j) {
    for (int i = (periodic ? 0 : 1); i <= (periodic ? nx - 1 : nx - 1); ++i) {
      const double rho_f = 0.5 * (cell_wrap(rho_old, nx, ny, i - 1, j, periodic) +
                                  cell_wrap(rho_old, nx, ny, i, j, periodic));
      const double wx = rho_f * u_star.fx(i, j) + jm.fx(i, j);
      const double wy =
          rho_f * quad_avg_y(u_star, nx, i, j, periodic) + quad_avg_y(jm, nx, i, j, periodic);
      double adv = 0.0;
      if (wx > 0.0)
        adv += wx * (u_new.fx(i, j) - ux(i - 1, j)) / hx;
      else if (wx < 0.0)
        adv += wx * (ux(i + 1, j) - u_new.fx(i, j)) / hx;
      if (wy > 0.0)
        adv += wy * (u_new.fx(i, j) - ux(i, j - 1)) / hy;
      else if (wy < 0.0)
        adv += wy * (ux(i, j + 1) - u_new.fx(i, j)) / hy;
      double divtau = 0.0;
      if (lam != 0.0 || eta != 0.0) {
        divtau = (tau_xx(i, j) - tau_xx(i - 1, j)) / hx +
                 (tau_xy(i, j + 1) - tau_xy(i, j)) / hy;
      }
      res.fx(i, j) = rho_f * (u_new.fx(i, j) - u_star.fx(i, j)) / dt + adv - divtau;
    }
  }
  for (int j = (periodic ? 0 : 1); j <= (periodic ? ny - 1 : ny - 1); ++j) {
    for (int i = 0; i < nx; ++i) {
      const double rho_f = 0.5 * (cell_wrap(rho_old, nx, ny, i, j - 1, periodic) +
                                  cell_wrap(rho_old, nx, ny, i, j, periodic));
      const double wy = rho_f * u_star.fy(i, j) + jm.fy(i, j);
      const double wx =
          rho_f * quad_avg_x(u_star, ny, i, j, periodic) + quad_avg_x(jm, ny, i, j, periodic);
      double adv = 0.0;
      if (wy > 0.0)
        adv += wy * (u_new.fy(i, j) - uy(i, j - 1)) / hy;
      else if (wy < 0.0)
        adv += wy * (uy(i, j + 1) - u_new.fy(i, j)) / hy;
      if (wx > 0.0)
        adv += wx * (u_new.fy(i, j) - uy(i - 1, j)) / hx;
      else if (wx < 0.0)
        adv += wx * (uy(i + 1, j) - u_new.fy(i, j)) / hx;
      double divtau = 0.0;
      if (lam != 0.0 || eta != 0.0) {
        divtau = (tau_yy(i, j) - tau_yy(i, j - 1)) / hy +
                 (tau_xy(i + 1, j) - tau_xy(i, j)) / hx;
      }
      res.fy(i, j) = rho_f * (u_new.fy(i, j) - u_star.fy(i, j)) / dt + adv - divtau;
    }
  }
  return res;
}

FaceField stress_dot_velocity(const Problem& p, const FaceField& u) {
  const Grid2D& g = p.grid;
  FaceField out(g);
  const double lam = p.scheme.lambda, eta = p.scheme.eta;
  if (lam == 0.0 && eta == 0.0) return out;

  const int nx = g.nx, ny = g.ny;
  const bool periodic = g.bc == BcMode::periodic;
  const double hx = g.hx, hy = g.hy;

  auto ux = [&](int i, int j) {
    if (periodic) {
      i = (i % nx + nx) % nx;
      j = (j % ny + ny) % ny;
    }
    return u.fx(i, j);
  };
  auto uy = [&](int i, int j) {
    if (periodic) {
      i = (i % nx + nx) % nx;
      j = (j % ny + ny) % ny;
    }
    return u.fy(i, j);
  };
  auto tau_xx = [&](int ci, int cj) {
    return (lam + 2.0 * eta) * (ux(ci + 1, cj) - ux(ci, cj)) / hx +
           lam * (uy(ci, cj + 1) - uy(ci, cj)) / hy;
  };
  auto tau_yy = [&](int ci, int cj) {
    return (lam + 2.0 * eta) * (uy(ci, cj + 1) - uy(ci, cj)) / hy +
           lam * (ux(ci + 1, cj) - ux(ci, cj)) / hx;
  };
  auto tau_xy = [&](int i, int j) {
    if (!periodic && (i <= 0 || i >= nx || j <= 0 || j >= ny)) return 0.0;
    return eta * ((ux(i, j) - ux(i, j - 1)) / hy + (uy(i, j) - uy(i - 1, j)) / hx);
  };

  // (tau . u)_x on interior x-faces; boundary faces stay zero (no-penetration
  // plus free slip make the normal energy flux vanish there)
  for (int j = 0; j < ny; ++j)
    for (int i = (periodic ? 0 : 1); i <= nx - 1; ++i) {
      const double txx = 0.5 * (tau_xx(i - 1 < 0 ? nx - 1 : i - 1, j) + tau_xx(i, j));
      const double txy = 0.5 * (tau_xy(i, j) + tau_xy(i, j + 1));
      const double uyf = quad_avg_y(u, nx, i, j, periodic);
      out.fx(i, j) = txx * u.fx(i, j) + txy * uyf;
    }
  for (int j = (periodic ? 0 : 1); j <= ny - 1; ++j)
    for (int i = 0; i < nx; ++i) {
      const double tyy = 0.5 * (tau_yy(i, j - 1 < 0 ? ny - 1 : j - 1) + tau_yy(i, j));
      const double txy = 0.5 * (tau_xy(i, j) + tau_xy(i + 1, j));
      const double uxf = quad_avg_x(u, ny, i, j, periodic);
      out.fy(i, j) = tyy * u.fy(i, j) + txy * uxf;
    }
  if (periodic) {
    for (int j = 0; j < ny; ++j) out.fx(nx, j) = out.fx(0, j);
    for (int i = 0; i < nx; ++i) out.fy(i, ny) = out.fy(i, 0);
  }
  return out;
}

}  // namespace prflow::stepper
