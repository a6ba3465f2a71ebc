#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "prflow/diagnostics.hpp"
#include "prflow/stepper.hpp"

using namespace prflow;
using namespace prflow::stepper;
using oracles::rel_err;

namespace {

SimState uniform_state(const Problem& p, double n1, double n2, double T) {
  SimState s;
  s.n = {CellField(p.grid, n1), CellField(p.grid, n2)};
  s.T = CellField(p.grid, T);
  s.u = FaceField(p.grid);
  return s;
}

}  // namespace

TEST_CASE("chemical_potential_fields") {
  Problem p = fixtures::droplet_problem(8, 8);

  SUBCASE("uniform fields reduce to the bulk chemical potential") {
    SimState s = uniform_state(p, 5.0e3, 2.0e3, 310.0);
    auto mu = chemical_potential_fields(p.mix, p.grid, s.n, s.n, s.T, 0.0);
    const BulkState b{{5.0e3, 2.0e3}, 310.0};
    auto mu_b = thermo::mu_bulk(p.mix, b, 0.0, thermo::MuPart::total);
    for (int i = 0; i < 2; ++i)
      for (double v : mu[i].v) CHECK(rel_err(v, mu_b[i]) < 1e-13);
  }

  SUBCASE("single component delta reproduces minus the five-point Laplacian") {
    Problem q = p;
    q.mix = fixtures::methane_only();
    q.mix.cij = {1.0};
    q.mobility.D = {0.0};
    std::vector<CellField> base(1, CellField(q.grid, 4.0e3));
    std::vector<CellField> pert = base;
    const double eps = 1.0;  // mol/m^3 bump
    pert[0](4, 4) += eps;
    CellField T(q.grid, 310.0);
    auto mu_base = chemical_potential_fields(q.mix, q.grid, base, base, T, 0.0);
    auto mu_pert = chemical_potential_fields(q.mix, q.grid, pert, base, T, 0.0);
    // gradient part is linear; isolate it by subtracting the bulk change
    const double ih2 = 1.0 / (q.grid.hx * q.grid.hx);
    const BulkState b0{{4.0e3}, 310.0}, b1{{4.0e3 + eps}, 310.0};
    const double dmu_bulk = thermo::mu_bulk(q.mix, b1, 0.0, thermo::MuPart::convex)[0] -
                            thermo::mu_bulk(q.mix, b0, 0.0, thermo::MuPart::convex)[0];
    const double d_center = mu_pert[0](4, 4) - mu_base[0](4, 4);
    const double d_nbr = mu_pert[0](3, 4) - mu_base[0](3, 4);
    CHECK(rel_err(d_center - dmu_bulk, eps * 4.0 * ih2) < 1e-9);
    CHECK(rel_err(d_nbr, -eps * ih2) < 1e-9);
  }

  SUBCASE("two-phase profile matches an independent assembly") {
    Problem q = fixtures::droplet_problem(12, 4);
    SimState s = fixtures::droplet_state(q);
    std::vector<CellField> n_old = s.n;
    // makes new and old differ so both convex and concave parts are exercised
    std::vector<CellField> n_new = s.n;
    for (auto& f : n_new)
      for (double& v : f.v) v *= 1.01;
    CellField T(q.grid, 315.0);
    const double theta = 0.5;
    auto mu = chemical_potential_fields(q.mix, q.grid, n_new, n_old, T, theta);

    // independent composition from thermo and grid primitives
    const auto lap = grid::div_c_grad(q.grid, q.mix.cij, n_new);
    for (int idx = 0; idx < q.grid.cells(); ++idx) {
      BulkState bn{{n_new[0].v[idx], n_new[1].v[idx]}, T.v[idx]};
      BulkState bo{{n_old[0].v[idx], n_old[1].v[idx]}, T.v[idx]};
      auto mc = thermo::mu_bulk(q.mix, bn, theta, thermo::MuPart::convex);
      auto mk = thermo::mu_bulk(q.mix, bo, theta, thermo::MuPart::concave);
      for (int i = 0; i < 2; ++i) {
        const double want = mc[i] + mk[i] - lap[i].v[idx];
        CHECK(rel_err(mu[i].v[idx], want) < 1e-12);
      }
    }
  }
}

TEST_CASE("intermediate_velocity") {
  Problem p = fixtures::droplet_problem(8, 8);

  SUBCASE("uniform potentials and no gravity keep u*") {
    SimState s = uniform_state(p, 5.0e3, 2.0e3, 310.0);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> ur(-1.0, 1.0);
    for (int j = 0; j < p.grid.ny; ++j)
      for (int i = 1; i < p.grid.nx; ++i) s.u.fx(i, j) = ur(rng);
    std::vector<CellField> mu = {CellField(p.grid, 100.0), CellField(p.grid, -50.0)};
    FaceField us = intermediate_velocity(p, s, mu, s.T);
    CHECK(grid::max_abs_diff(us, s.u) == 0.0);
  }

  SUBCASE("single potential jump forces one face") {
    Problem q = fixtures::droplet_problem(4, 2);
    SimState s = uniform_state(q, 5.0e3, 2.0e3, 310.0);
    std::vector<CellField> mu = {CellField(q.grid), CellField(q.grid)};
    for (int j = 0; j < 2; ++j) {
      mu[0](2, j) = 10.0;
      mu[0](3, j) = 10.0;  // jump between columns 1 and 2 only
    }
    FaceField us = intermediate_velocity(q, s, mu, s.T);
    const double rho = 16.04e-3 * 5.0e3 + 72.15e-3 * 2.0e3;
    const double want = -q.scheme.dt * (5.0e3 / rho) * (10.0 / q.grid.hx);
    CHECK(rel_err(us.fx(2, 0), want) < 1e-13);
    CHECK(us.fx(1, 0) == 0.0);
    CHECK(us.fx(0, 0) == 0.0);  // no penetration
  }

  SUBCASE("gravity accelerates along -y") {
    Problem q = fixtures::droplet_problem(4, 4);
    q.scheme.gravity = 9.81;
    for (int j = 0; j < q.grid.ny; ++j)
      for (int i = 0; i < q.grid.nx; ++i) q.gh(i, j) = 9.81 * (j + 0.5) * q.grid.hy;
    SimState s = uniform_state(q, 5.0e3, 2.0e3, 310.0);
    std::vector<CellField> mu = {CellField(q.grid), CellField(q.grid)};
    FaceField us = intermediate_velocity(q, s, mu, s.T);
    CHECK(us.fy(1, 1) == doctest::Approx(-q.scheme.dt * 9.81).epsilon(1e-14));
    CHECK(us.fy(1, 0) == 0.0);  // boundary face stays closed
  }
}

TEST_CASE("solve_mass") {
  Problem p = fixtures::droplet_problem(10, 10);
  SimState s = fixtures::droplet_state(p);
  std::vector<FaceField> zeroJ = {FaceField(p.grid), FaceField(p.grid)};

  SUBCASE("no transport, no change") {
    auto out = solve_mass(p.grid, s.n, FaceField(p.grid), zeroJ, p.scheme.dt);
    for (int i = 0; i < 2; ++i) CHECK(grid::max_abs_diff(out[i], s.n[i]) == 0.0);
  }

  SUBCASE("conservation under closed boundaries") {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> ur(-1.0, 1.0);
    FaceField us(p.grid);
    std::vector<FaceField> J = zeroJ;
    for (int j = 0; j < p.grid.ny; ++j)
      for (int i = 1; i < p.grid.nx; ++i) {
        us.fx(i, j) = ur(rng);
        J[0].fx(i, j) = 1e4 * ur(rng);
        J[1].fx(i, j) = 1e4 * ur(rng);
      }
    for (int j = 1; j < p.grid.ny; ++j)
      for (int i = 0; i < p.grid.nx; ++i) {
        us.fy(i, j) = ur(rng);
        J[0].fy(i, j) = 1e4 * ur(rng);
        J[1].fy(i, j) = 1e4 * ur(rng);
      }
    auto out = solve_mass(p.grid, s.n, us, J, p.scheme.dt);
    for (int i = 0; i < 2; ++i) {
      const double before = grid::integrate(p.grid, s.n[i]);
      const double after = grid::integrate(p.grid, out[i]);
      CHECK(rel_err(after, before) < 1e-13);
    }
  }

  SUBCASE("uniform density in a divergence-free field is unchanged") {
    SimState u0 = uniform_state(p, 4.0e3, 1.0e3, 310.0);
    std::vector<std::vector<double>> psi(p.grid.nx + 1,
                                         std::vector<double>(p.grid.ny + 1, 0.0));
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> ur(-1.0, 1.0);
    // scaled so the face velocities are O(1) m/s
    for (int i = 1; i < p.grid.nx; ++i)
      for (int j = 1; j < p.grid.ny; ++j) psi[i][j] = ur(rng) * p.grid.hy;
    FaceField us(p.grid);
    for (int j = 0; j < p.grid.ny; ++j)
      for (int i = 1; i < p.grid.nx; ++i)
        us.fx(i, j) = (psi[i][j + 1] - psi[i][j]) / p.grid.hy;
    for (int j = 1; j < p.grid.ny; ++j)
      for (int i = 0; i < p.grid.nx; ++i)
        us.fy(i, j) = -(psi[i + 1][j] - psi[i][j]) / p.grid.hx;
    auto out = solve_mass(p.grid, u0.n, us, zeroJ, p.scheme.dt);
    for (int i = 0; i < 2; ++i)
      CHECK(grid::max_abs_diff(out[i], u0.n[i]) < 1e-12 * grid::max_abs(u0.n[i]));
  }
}

TEST_CASE("solve_momentum") {
  Problem p = fixtures::droplet_problem(10, 8);
  SimState s = fixtures::droplet_state(p);
  const CellField rho = fieldops::mass_density(p.mix, s.n);
  std::vector<FaceField> zeroJ = {FaceField(p.grid), FaceField(p.grid)};

  SUBCASE("rest stays at rest") {
    FaceField u = solve_momentum(p, FaceField(p.grid), zeroJ, rho);
    CHECK(grid::max_abs(u) == 0.0);
  }

  SUBCASE("uniform velocity is exact under periodic advection") {
    Problem q = p;
    q.grid.bc = BcMode::periodic;
    CellField rho_u(q.grid, 300.0);
    FaceField us(q.grid);
    for (double& v : us.x) v = 3.0;
    for (double& v : us.y) v = -2.0;
    FaceField u = solve_momentum(q, us, zeroJ, rho_u);
    for (double v : u.x) CHECK(v == doctest::Approx(3.0).epsilon(1e-12));
    for (double v : u.y) CHECK(v == doctest::Approx(-2.0).epsilon(1e-12));
  }

  SUBCASE("solver residual is tiny, with and without viscosity") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> ur(-5.0, 5.0);
    FaceField us(p.grid);
    std::vector<FaceField> J = zeroJ;
    for (int j = 0; j < p.grid.ny; ++j)
      for (int i = 1; i < p.grid.nx; ++i) {
        us.fx(i, j) = ur(rng);
        J[0].fx(i, j) = 1e3 * ur(rng);
        J[1].fx(i, j) = 1e3 * ur(rng);
      }
    for (int j = 1; j < p.grid.ny; ++j)
      for (int i = 0; i < p.grid.nx; ++i) {
        us.fy(i, j) = ur(rng);
        J[0].fy(i, j) = 1e3 * ur(rng);
        J[1].fy(i, j) = 1e3 * ur(rng);
      }
    for (double visc : {0.0, 1e-5}) {
      Problem q = p;
      q.scheme.lambda = visc;
      q.scheme.eta = 2.0 * visc;
      FaceField u = solve_momentum(q, us, J, rho);
      FaceField res = momentum_residual(q, u, us, J, rho);
      const double scale = grid::max_abs(rho) * grid::max_abs(us) / q.scheme.dt;
      CHECK(grid::max_abs(res) < 1e-11 * scale);
    }
  }
}

TEST_CASE("recover_temperature") {
  Problem p = fixtures::droplet_problem(6, 6);
  SimState s = fixtures::droplet_state(p);
  const CellField rho = fieldops::mass_density(p.mix, s.n);

  SUBCASE("round trip at the initial temperature") {
    // e_t built from a known (n, T, u = 0) state
    const CellField e = total_energy_density(p, s);
    CellField T = recover_temperature(p, e, s.n, s.u, rho);
    for (double t : T.v) CHECK(rel_err(t, 310.0) < 1e-10);
  }

  SUBCASE("round trip with nonzero velocity and gravity") {
    Problem q = p;
    q.scheme.gravity = 9.81;
    for (int j = 0; j < q.grid.ny; ++j)
      for (int i = 0; i < q.grid.nx; ++i) q.gh(i, j) = 9.81 * (j + 0.5) * q.grid.hy;
    SimState sq = fixtures::droplet_state(q);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> ur(-2.0, 2.0);
    for (int j = 0; j < q.grid.ny; ++j)
      for (int i = 1; i < q.grid.nx; ++i) sq.u.fx(i, j) = ur(rng);
    for (double& t : sq.T.v) t = 300.0 + 20.0 * ur(rng);
    const CellField e = total_energy_density(q, sq);
    CellField T = recover_temperature(q, e, sq.n, sq.u, rho);
    CHECK(grid::max_abs_diff(T, sq.T) < 1e-9 * 310.0);
  }

  SUBCASE("monotone in the energy") {
    const CellField e = total_energy_density(p, s);
    CellField e_hi = e;
    for (double& v : e_hi.v) v += 1e5;  // J/m^3
    CellField T_lo = recover_temperature(p, e, s.n, s.u, rho);
    CellField T_hi = recover_temperature(p, e_hi, s.n, s.u, rho);
    for (int k = 0; k < T_lo.size(); ++k) CHECK(T_hi.v[k] > T_lo.v[k]);
  }

  SUBCASE("no root in the bracket is reported") {
    CellField e(p.grid, 1e12);  // far above theta_b(n, T_max)
    CHECK_THROWS_AS(recover_temperature(p, e, s.n, s.u, rho), SolverError);
  }
}

TEST_CASE("energy_update") {
  Problem p = fixtures::droplet_problem(8, 8);

  SUBCASE("uniform equilibrium is an exact fixed point") {
    SimState s = uniform_state(p, 5.0e3, 2.0e3, 310.0);
    auto mu = chemical_potential_fields(p.mix, p.grid, s.n, s.n, s.T, 0.0);
    std::vector<FaceField> J = {FaceField(p.grid), FaceField(p.grid)};
    const CellField e_new = energy_update(p, s, s.n, s.T, s.u, FaceField(p.grid), mu,
                                          FaceField(p.grid), J);
    const CellField e_old = total_energy_density(p, s);
    CHECK(grid::max_abs_diff(e_new, e_old) == 0.0);
  }

  SUBCASE("conservative for arbitrary consistent fields") {
    SimState s = fixtures::droplet_state(p);
    std::vector<CellField> n_new = s.n;
    for (auto& f : n_new)
      for (double& v : f.v) v *= 1.002;
    CellField T_new(p.grid, 311.0);
    auto mu = chemical_potential_fields(p.mix, p.grid, n_new, s.n, T_new, 0.0);
    auto J = transport::diffusion_fluxes(p.mobility, p.mix, p.grid, s.n, s.T, mu, T_new, p.gh);
    FaceField us = intermediate_velocity(p, s, mu, T_new);
    const CellField rho = fieldops::mass_density(p.mix, s.n);
    FaceField u_new = solve_momentum(p, us, J, rho);
    FaceField q = transport::heat_flux(p.mobility, p.grid, s.n, T_new);
    const CellField e_new = energy_update(p, s, n_new, T_new, u_new, us, mu, q, J);
    const CellField e_old = total_energy_density(p, s);
    CHECK(rel_err(grid::integrate(p.grid, e_new), grid::integrate(p.grid, e_old)) < 1e-12);
  }
}

TEST_CASE("step") {
  SUBCASE("uniform state is a fixed point over ten steps") {
    Problem p = fixtures::droplet_problem(8, 8);
    SimState s = uniform_state(p, 5.0e3, 2.0e3, 310.0);
    for (int k = 0; k < 10; ++k) {
      auto [next, rep] = step(p, s);
      CHECK(rep.converged);
      for (int i = 0; i < 2; ++i)
        CHECK(grid::max_abs_diff(next.n[i], s.n[i]) < 1e-12 * 5.0e3);
      CHECK(grid::max_abs_diff(next.T, s.T) < 1e-12 * 310.0);
      CHECK(grid::max_abs(next.u) < 1e-20);
      s = std::move(next);
    }
  }

  SUBCASE("small droplet: entropy, mass and energy laws over five steps") {
    Problem p = fixtures::droplet_problem(16, 16);
    SimState s = fixtures::droplet_state(p);
    double S_prev = diagnostics::total_entropy(p, s);
    const double E0 = diagnostics::total_energy(p, s);
    const auto moles0 = diagnostics::species_totals(p.grid, s);
    for (int k = 0; k < 5; ++k) {
      auto [next, rep] = step(p, s);
      CHECK(rep.converged);
      CHECK(rep.res_mass < 1e-9);
      CHECK(rep.res_T < 1e-9);
      const double S = diagnostics::total_entropy(p, next);
      CHECK(S >= S_prev - 1e-12 * std::abs(S_prev));
      const double E = diagnostics::total_energy(p, next);
      CHECK(rel_err(E, E0) < 1e-10);
      const auto moles = diagnostics::species_totals(p.grid, next);
      for (int i = 0; i < 2; ++i) CHECK(rel_err(moles[i], moles0[i]) < 1e-13);
      S_prev = S;
      s = std::move(next);
    }
  }

  SUBCASE("x-y reflection symmetry is preserved") {
    Problem p = fixtures::droplet_problem(12, 12);
    SimState s = fixtures::droplet_state(p);
    for (int k = 0; k < 3; ++k) {
      auto [next, rep] = step(p, s);
      s = std::move(next);
    }
    // the square droplet is symmetric under (i,j) -> (j,i)
    for (int j = 0; j < 12; ++j)
      for (int i = 0; i < 12; ++i) {
        CHECK(rel_err(s.n[1](i, j), s.n[1](j, i)) < 1e-11);
        CHECK(rel_err(s.T(i, j), s.T(j, i)) < 1e-11);
      }
  }
}
