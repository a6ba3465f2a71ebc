#include "prflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "prflow/errors.hpp"

namespace prflow::diagnostics {

double total_entropy(const Problem& p, const SimState& s) {
  return grid::integrate(p.grid, fieldops::s_bulk(p.mix, s.n, s.T));
}

double total_energy(const Problem& p, const SimState& s) {
  return grid::integrate(p.grid, stepper::total_energy_density(p, s));
}

std::vector<double> species_totals(const Grid2D& g, const SimState& s) {
  std::vector<double> out(s.n.size());
  for (size_t i = 0; i < s.n.size(); ++i) out[i] = grid::integrate(g, s.n[i]);
  return out;
}

double kinetic_total(const Problem& p, const SimState& s) {
  const CellField rho = fieldops::mass_density(p.mix, s.n);
  return grid::integrate(p.grid, fieldops::kinetic_energy(p.grid, rho, s.u));
}

namespace {

struct Pt {
  double x, y;
};

double seglen(const Pt& a, const Pt& b) {
  return std::hypot(b.x - a.x, b.y - a.y);
}

}  // namespace

double shape_metric(const Grid2D& g, const CellField& f, double level) {
  const int nx = g.nx, ny = g.ny;

  int in_cells = 0;
  for (double v : f.v) in_cells += (v >= level);
  if (in_cells == 0) throw DomainError("shape metric: empty level set");
  const double area = in_cells * g.cell_volume();

  // contour length by marching squares on the cell-center lattice
  double perim = 0.0;
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      const double a = f(i, j), b = f(i + 1, j), c = f(i + 1, j + 1), d = f(i, j + 1);
      const int code = (a >= level) | ((b >= level) << 1) | ((c >= level) << 2) |
                       ((d >= level) << 3);
      if (code == 0 || code == 15) continue;
      auto interp = [&](double va, double vb) { return (level - va) / (vb - va); };
      const Pt bottom{interp(a, b) * g.hx, 0.0};
      const Pt right{g.hx, interp(b, c) * g.hy};
      const Pt top{interp(d, c) * g.hx, g.hy};
      const Pt left{0.0, interp(a, d) * g.hy};
      switch (code) {
        case 1: case 14: perim += seglen(left, bottom); break;
        case 2: case 13: perim += seglen(bottom, right); break;
        case 3: case 12: perim += seglen(left, right); break;
        case 4: case 11: perim += seglen(right, top); break;
        case 6: case 9:  perim += seglen(bottom, top); break;
        case 7: case 8:  perim += seglen(left, top); break;
        case 5: case 10: {
          // saddle: split by the center average
          const double ctr = 0.25 * (a + b + c + d);
          const bool ctr_in = ctr >= level;
          if ((code == 5) == ctr_in) {
            perim += seglen(left, top) + seglen(bottom, right);
          } else {
            perim += seglen(left, bottom) + seglen(right, top);
          }
          break;
        }
        default: break;
      }
    }
  }

  // closure along the domain boundary where the region touches it
  for (int i = 0; i < nx; ++i) {
    if (f(i, 0) >= level) perim += g.hx;
    if (f(i, ny - 1) >= level) perim += g.hx;
  }
  for (int j = 0; j < ny; ++j) {
    if (f(0, j) >= level) perim += g.hy;
    if (f(nx - 1, j) >= level) perim += g.hy;
  }

  return 4.0 * M_PI * area / (perim * perim);
}

double pressure_relation_residual(const Mixture& mix, const Grid2D& g,
                                  const std::vector<CellField>& n, const CellField& T) {
  const int m = mix.size();
  const int nc = g.cells();

  std::vector<CellField> mu(m, CellField(g));
  CellField pb(g), sb(g);
  std::vector<double> nn(m), mm(m);
  for (int idx = 0; idx < nc; ++idx) {
    for (int i = 0; i < m; ++i) nn[i] = n[i].v[idx];
    thermo::check_domain(mix, nn.data(), T.v[idx]);
    thermo::mu_bulk_into(mix, nn.data(), T.v[idx], 0.0, thermo::MuPart::total, mm.data());
    double p = -thermo::f_bulk_raw(mix, nn.data(), T.v[idx]);
    for (int i = 0; i < m; ++i) {
      mu[i].v[idx] = mm[i];
      p += nn[i] * mm[i];
    }
    pb.v[idx] = p;
    sb.v[idx] = thermo::s_bulk_raw(mix, nn.data(), T.v[idx]);
  }

  const FaceField gp = grid::grad(g, pb);
  const FaceField gT = grid::grad(g, T);
  const FaceField sf = grid::face_avg(g, sb);
  std::vector<FaceField> gmu(m), nf(m);
  for (int i = 0; i < m; ++i) {
    gmu[i] = grid::grad(g, mu[i]);
    nf[i] = grid::face_avg(g, n[i]);
  }

  double worst = 0.0;
  for (size_t k = 0; k < gp.x.size(); ++k) {
    double r = -gp.x[k] + sf.x[k] * gT.x[k];
    for (int i = 0; i < m; ++i) r += nf[i].x[k] * gmu[i].x[k];
    worst = std::max(worst, std::abs(r));
  }
  for (size_t k = 0; k < gp.y.size(); ++k) {
    double r = -gp.y[k] + sf.y[k] * gT.y[k];
    for (int i = 0; i < m; ++i) r += nf[i].y[k] * gmu[i].y[k];
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

DiagnosticsRecord record(const Problem& p, const SimState& s, int step_index,
                         int shape_component) {
  DiagnosticsRecord r;
  r.step = step_index;
  r.t = s.t;
  r.S_total = total_entropy(p, s);
  r.E_total = total_energy(p, s);
  r.moles = species_totals(p.grid, s);
  r.kinetic = kinetic_total(p, s);
  r.max_u = grid::max_abs(s.u);

  const CellField& f = s.n[shape_component];
  const auto [lo, hi] = std::minmax_element(f.v.begin(), f.v.end());
  if (*hi > *lo) {
    r.shape = shape_metric(p.grid, f, 0.5 * (*lo + *hi));
  } else {
    r.shape = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

}  // namespace prflow::diagnostics
