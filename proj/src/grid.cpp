#include "prflow/grid.hpp"

#include <algorithm>
#include <cmath>

namespace prflow::grid {

FaceField grad(const Grid2D& g, const CellField& f, Exec ex) {
  assert(f.nx == g.nx && f.ny == g.ny);
  FaceField out(g);
  const int nx = g.nx, ny = g.ny;
  const double ihx = 1.0 / g.hx, ihy = 1.0 / g.hy;
  const bool periodic = g.bc == BcMode::periodic;

  par_for(ex, (nx + 1) * ny, [&](int idx) {
    const int i = idx % (nx + 1), j = idx / (nx + 1);
    if (i > 0 && i < nx) {
      out.fx(i, j) = (f(i, j) - f(i - 1, j)) * ihx;
    } else if (periodic) {
      out.fx(i, j) = (f(0, j) - f(nx - 1, j)) * ihx;
    }
  });
  par_for(ex, nx * (ny + 1), [&](int idx) {
    const int i = idx % nx, j = idx / nx;
    if (j > 0 && j < ny) {
      out.fy(i, j) = (f(i, j) - f(i, j - 1)) * ihy;
    } else if (periodic) {
      out.fy(i, j) = (f(i, 0) - f(i, ny - 1)) * ihy;
    }
  });
  return out;
}

CellField div(const Grid2D& g, const FaceField& F, Exec ex) {
  assert(F.nx == g.nx && F.ny == g.ny);
  CellField out(g);
  const int nx = g.nx;
  const double ihx = 1.0 / g.hx, ihy = 1.0 / g.hy;
  par_for(ex, g.cells(), [&](int idx) {
    const int i = idx % nx, j = idx / nx;
    out(i, j) = (F.fx(i + 1, j) - F.fx(i, j)) * ihx + (F.fy(i, j + 1) - F.fy(i, j)) * ihy;
  });
  return out;
}

std::vector<CellField> div_c_grad(const Grid2D& g, const std::vector<double>& c,
                                  const std::vector<CellField>& n, Exec ex) {
  const int m = int(n.size());
  assert(int(c.size()) == m * m);
  std::vector<CellField> lap;
  lap.reserve(m);
  for (int j = 0; j < m; ++j) lap.push_back(div(g, grad(g, n[j], ex), ex));

  std::vector<CellField> out(m, CellField(g));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double cij = c[size_t(i) * m + j];
      if (cij == 0.0) continue;
      par_for(ex, g.cells(), [&](int idx) { out[i].v[idx] += cij * lap[j].v[idx]; });
    }
  }
  return out;
}

CellField upwind_div(const Grid2D& g, const FaceField& u, const CellField& phi, Exec ex) {
  assert(u.nx == g.nx && phi.nx == g.nx);
  const int nx = g.nx, ny = g.ny;
  const bool periodic = g.bc == BcMode::periodic;
  FaceField flux(g);

  par_for(ex, (nx + 1) * ny, [&](int idx) {
    const int i = idx % (nx + 1), j = idx / (nx + 1);
    const double uf = u.fx(i, j);
    int idon;  // donor cell x-index
    if (uf > 0.0) {
      idon = i - 1;
    } else {
      idon = i;
    }
    if (idon < 0) idon = periodic ? nx - 1 : 0;
    if (idon > nx - 1) idon = periodic ? 0 : nx - 1;
    flux.fx(i, j) = uf * phi(idon, j);
  });
  par_for(ex, nx * (ny + 1), [&](int idx) {
    const int i = idx % nx, j = idx / nx;
    const double uf = u.fy(i, j);
    int jdon = (uf > 0.0) ? j - 1 : j;
    if (jdon < 0) jdon = periodic ? ny - 1 : 0;
    if (jdon > ny - 1) jdon = periodic ? 0 : ny - 1;
    flux.fy(i, j) = uf * phi(i, jdon);
  });
  return div(g, flux, ex);
}

double integrate(const Grid2D& g, const CellField& f) {
  // Kahan summation keeps the conservation checks at round-off level.
  double sum = 0.0, comp = 0.0;
  for (double x : f.v) {
    const double y = x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum * g.cell_volume();
}

FaceField face_avg(const Grid2D& g, const CellField& f, Exec ex) {
  FaceField out(g);
  const int nx = g.nx, ny = g.ny;
  const bool periodic = g.bc == BcMode::periodic;
  par_for(ex, (nx + 1) * ny, [&](int idx) {
    const int i = idx % (nx + 1), j = idx / (nx + 1);
    if (i > 0 && i < nx) {
      out.fx(i, j) = 0.5 * (f(i - 1, j) + f(i, j));
    } else if (periodic) {
      out.fx(i, j) = 0.5 * (f(nx - 1, j) + f(0, j));
    } else {
      out.fx(i, j) = f(i == 0 ? 0 : nx - 1, j);
    }
  });
  par_for(ex, nx * (ny + 1), [&](int idx) {
    const int i = idx % nx, j = idx / nx;
    if (j > 0 && j < ny) {
      out.fy(i, j) = 0.5 * (f(i, j - 1) + f(i, j));
    } else if (periodic) {
      out.fy(i, j) = 0.5 * (f(i, ny - 1) + f(i, 0));
    } else {
      out.fy(i, j) = f(i, j == 0 ? 0 : ny - 1);
    }
  });
  return out;
}

CellField dot_faces(const Grid2D& g, const FaceField& F, const FaceField& G, Exec ex) {
  CellField out(g);
  const int nx = g.nx;
  par_for(ex, g.cells(), [&](int idx) {
    const int i = idx % nx, j = idx / nx;
    out(i, j) = 0.5 * (F.fx(i, j) * G.fx(i, j) + F.fx(i + 1, j) * G.fx(i + 1, j)) +
                0.5 * (F.fy(i, j) * G.fy(i, j) + F.fy(i, j + 1) * G.fy(i, j + 1));
  });
  return out;
}

double max_abs(const CellField& f) {
  double m = 0.0;
  for (double x : f.v) m = std::max(m, std::abs(x));
  return m;
}

double max_abs(const FaceField& F) {
  double m = 0.0;
  for (double x : F.x) m = std::max(m, std::abs(x));
  for (double x : F.y) m = std::max(m, std::abs(x));
  return m;
}

double max_abs_diff(const CellField& a, const CellField& b) {
  assert(a.v.size() == b.v.size());
  double m = 0.0;
  for (size_t k = 0; k < a.v.size(); ++k) m = std::max(m, std::abs(a.v[k] - b.v[k]));
  return m;
}

double max_abs_diff(const FaceField& a, const FaceField& b) {
  assert(a.x.size() == b.x.size() && a.y.size() == b.y.size());
  double m = 0.0;
  for (size_t k = 0; k < a.x.size(); ++k) m = std::max(m, std::abs(a.x[k] - b.x[k]));
  for (size_t k = 0; k < a.y.size(); ++k) m = std::max(m, std::abs(a.y[k] - b.y[k]));
  return m;
}

}  // namespace prflow::grid
