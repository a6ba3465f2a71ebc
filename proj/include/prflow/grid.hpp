#pragma once

#include <cassert>
#include <vector>

#include "prflow/parallel.hpp"

namespace prflow {

enum class BcMode { neumann, periodic };

// Uniform rectangular mesh. Scalars live at cell centers, velocity components
// on cell faces (MAC layout: x-velocity on vertical faces, y-velocity on
// horizontal faces).
struct Grid2D {
  int nx = 0, ny = 0;
  double hx = 0.0, hy = 0.0;  // [m]
  BcMode bc = BcMode::neumann;

  int cells() const { return nx * ny; }
  int xfaces() const { return (nx + 1) * ny; }
  int yfaces() const { return nx * (ny + 1); }
  double cell_volume() const { return hx * hy; }
};

struct CellField {
  int nx = 0, ny = 0;
  std::vector<double> v;

  CellField() = default;
  CellField(int nx_, int ny_, double fill = 0.0) : nx(nx_), ny(ny_), v(size_t(nx_) * ny_, fill) {}
  explicit CellField(const Grid2D& g, double fill = 0.0) : CellField(g.nx, g.ny, fill) {}

  double& operator()(int i, int j) { return v[size_t(j) * nx + i]; }
  double operator()(int i, int j) const { return v[size_t(j) * nx + i]; }
  int size() const { return nx * ny; }
};

// xcomp on vertical faces ((nx+1) x ny), ycomp on horizontal faces (nx x (ny+1)).
struct FaceField {
  int nx = 0, ny = 0;
  std::vector<double> x, y;

  FaceField() = default;
  FaceField(int nx_, int ny_)
      : nx(nx_), ny(ny_), x(size_t(nx_ + 1) * ny_, 0.0), y(size_t(nx_) * (ny_ + 1), 0.0) {}
  explicit FaceField(const Grid2D& g) : FaceField(g.nx, g.ny) {}

  double& fx(int i, int j) { return x[size_t(j) * (nx + 1) + i]; }
  double fx(int i, int j) const { return x[size_t(j) * (nx + 1) + i]; }
  double& fy(int i, int j) { return y[size_t(j) * nx + i]; }
  double fy(int i, int j) const { return y[size_t(j) * nx + i]; }
};

namespace grid {

// Two-point face-normal gradient. Boundary faces carry 0 under homogeneous
// Neumann and the wraparound difference under periodic.
FaceField grad(const Grid2D& g, const CellField& f, Exec ex = default_exec());

// Conservative face-difference divergence (adjoint of grad up to boundary terms).
CellField div(const Grid2D& g, const FaceField& F, Exec ex = default_exec());

// Component i of the result is sum_j c[i][j] * div(grad(n[j])) (five-point stencil).
std::vector<CellField> div_c_grad(const Grid2D& g, const std::vector<double>& c,
                                  const std::vector<CellField>& n, Exec ex = default_exec());

// Divergence of donor-cell upwind fluxes u_face * phi_donor.
CellField upwind_div(const Grid2D& g, const FaceField& u, const CellField& phi,
                     Exec ex = default_exec());

// sum f * hx * hy (compensated summation, always serial).
double integrate(const Grid2D& g, const CellField& f);

// Arithmetic two-cell mean on faces; single-sided value on Neumann boundary faces.
FaceField face_avg(const Grid2D& g, const CellField& f, Exec ex = default_exec());

// Cellwise inner product of two face fields: per-direction mean of the two
// adjacent face products, x and y contributions added.
CellField dot_faces(const Grid2D& g, const FaceField& F, const FaceField& G,
                    Exec ex = default_exec());

double max_abs(const CellField& f);
double max_abs(const FaceField& F);

// max_i |a_i - b_i|, fields of identical shape
double max_abs_diff(const CellField& a, const CellField& b);
double max_abs_diff(const FaceField& a, const FaceField& b);

}  // namespace grid
}  // namespace prflow
