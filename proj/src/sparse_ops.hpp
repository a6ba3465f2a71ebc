// Sparse-matrix mirrors of the grid operators, used by the implicit
// sub-solves. Stencils and boundary handling must match grid.cpp exactly.
#pragma once

#include <vector>

#include <Eigen/Sparse>

#include "prflow/grid.hpp"

namespace prflow::ops {

using SpMat = Eigen::SparseMatrix<double>;
using Trip = Eigen::Triplet<double>;

inline int nfaces(const Grid2D& g) { return g.xfaces() + g.yfaces(); }
inline int xface_id(const Grid2D& g, int i, int j) { return j * (g.nx + 1) + i; }
inline int yface_id(const Grid2D& g, int i, int j) { return g.xfaces() + j * g.nx + i; }

// nf x nc two-point gradient (zero rows on Neumann boundary faces).
inline SpMat build_grad(const Grid2D& g) {
  const int nx = g.nx, ny = g.ny;
  const bool periodic = g.bc == BcMode::periodic;
  std::vector<Trip> t;
  t.reserve(size_t(nfaces(g)) * 2);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const int row = xface_id(g, i, j);
      if (i > 0 && i < nx) {
        t.emplace_back(row, j * nx + i, 1.0 / g.hx);
        t.emplace_back(row, j * nx + i - 1, -1.0 / g.hx);
      } else if (periodic) {
        t.emplace_back(row, j * nx + 0, 1.0 / g.hx);
        t.emplace_back(row, j * nx + nx - 1, -1.0 / g.hx);
      }
    }
  }
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int row = yface_id(g, i, j);
      if (j > 0 && j < ny) {
        t.emplace_back(row, j * nx + i, 1.0 / g.hy);
        t.emplace_back(row, (j - 1) * nx + i, -1.0 / g.hy);
      } else if (periodic) {
        t.emplace_back(row, 0 * nx + i, 1.0 / g.hy);
        t.emplace_back(row, (ny - 1) * nx + i, -1.0 / g.hy);
      }
    }
  }
  SpMat m(nfaces(g), g.cells());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

// nc x nf conservative divergence.
inline SpMat build_div(const Grid2D& g) {
  const int nx = g.nx, ny = g.ny;
  std::vector<Trip> t;
  t.reserve(size_t(g.cells()) * 4);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int row = j * nx + i;
      t.emplace_back(row, xface_id(g, i + 1, j), 1.0 / g.hx);
      t.emplace_back(row, xface_id(g, i, j), -1.0 / g.hx);
      t.emplace_back(row, yface_id(g, i, j + 1), 1.0 / g.hy);
      t.emplace_back(row, yface_id(g, i, j), -1.0 / g.hy);
    }
  }
  SpMat m(g.cells(), nfaces(g));
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

inline SpMat face_diag(const Grid2D& g, const std::vector<double>& w) {
  const int nf = nfaces(g);
  SpMat m(nf, nf);
  m.reserve(Eigen::VectorXi::Constant(nf, 1));
  for (int k = 0; k < nf; ++k) m.insert(k, k) = w[k];
  m.makeCompressed();
  return m;
}

inline SpMat cell_diag(const std::vector<double>& w) {
  const int nc = int(w.size());
  SpMat m(nc, nc);
  m.reserve(Eigen::VectorXi::Constant(nc, 1));
  for (int k = 0; k < nc; ++k) m.insert(k, k) = w[k];
  m.makeCompressed();
  return m;
}

inline std::vector<double> face_flat(const Grid2D& g, const FaceField& f) {
  std::vector<double> v(nfaces(g));
  std::copy(f.x.begin(), f.x.end(), v.begin());
  std::copy(f.y.begin(), f.y.end(), v.begin() + g.xfaces());
  return v;
}

}  // namespace prflow::ops
