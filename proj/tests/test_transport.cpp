#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "prflow/transport.hpp"

using namespace prflow;
using namespace prflow::transport;

namespace {

MobilitySpec mass_spec() {
  MobilitySpec s;
  s.model = FluxModel::mass;
  s.D = {0.0, 1e-8, 1e-8, 0.0};
  s.kappa0 = 1e-3;
  return s;
}

MobilitySpec molar_spec() {
  MobilitySpec s = mass_spec();
  s.model = FluxModel::molar;
  return s;
}

}  // namespace

TEST_CASE("mobility null vectors and PSD") {
  const Mixture mix = fixtures::methane_pentane();

  SUBCASE("molar model: row sums vanish exactly") {
    for (const BulkState& s : fixtures::random_states(mix, 100)) {
      auto L = mobility(molar_spec(), mix, s);
      CHECK(L[0] + L[1] == 0.0);
      CHECK(L[2] + L[3] == 0.0);
      CHECK(L[1] == L[2]);
    }
  }

  SUBCASE("mass model: Mw-weighted column sums vanish to round-off") {
    const double mw1 = mix.components[0].Mw, mw2 = mix.components[1].Mw;
    for (const BulkState& s : fixtures::random_states(mix, 100, 5)) {
      auto L = mobility(mass_spec(), mix, s);
      const double scale = std::abs(mw1 * L[1]);
      CHECK(std::abs(mw1 * L[0] + mw2 * L[2]) <= 2e-15 * scale);
      CHECK(std::abs(mw1 * L[1] + mw2 * L[3]) <= 2e-15 * scale);
      CHECK(L[1] == L[2]);
    }
  }

  SUBCASE("eigenvalues nonnegative, both models") {
    for (const BulkState& s : fixtures::random_states(mix, 100, 9)) {
      for (const MobilitySpec& spec : {molar_spec(), mass_spec()}) {
        auto L = mobility(spec, mix, s);
        Eigen::MatrixXd M(2, 2);
        M << L[0], L[1], L[2], L[3];
        const double norm = M.cwiseAbs().maxCoeff();
        CHECK(oracles::min_eigenvalue(M) >= -1e-14 * norm);
      }
    }
  }

  SUBCASE("rejects nonpositive density") {
    BulkState s{{-1.0, 2.0}, 300.0};
    CHECK_THROWS_AS(mobility(mass_spec(), mix, s), DomainError);
  }

  SUBCASE("spec validation") {
    MobilitySpec bad = mass_spec();
    bad.D = {0.0, 1e-8, 2e-8, 0.0};
    CHECK_THROWS_AS(bad.validate(2), ValidationError);
    bad = mass_spec();
    bad.D = {1e-9, 1e-8, 1e-8, 0.0};
    CHECK_THROWS_AS(bad.validate(2), ValidationError);
    bad = mass_spec();
    bad.kappa0 = -1.0;
    CHECK_THROWS_AS(bad.validate(2), ValidationError);
    CHECK_NOTHROW(mass_spec().validate(2));
  }
}

TEST_CASE("diffusion_fluxes") {
  const Mixture mix = fixtures::methane_pentane();
  Grid2D g{12, 10, 0.5e-9, 0.5e-9, BcMode::neumann};
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> un(2.0e3, 8.0e3), umu(-500.0, 500.0),
      ut(300.0, 320.0);

  std::vector<CellField> n_old = {CellField(g), CellField(g)};
  std::vector<CellField> mu = {CellField(g), CellField(g)};
  CellField T_old(g), T_new(g), gh(g, 0.0);
  for (int k = 0; k < g.cells(); ++k) {
    n_old[0].v[k] = un(rng);
    n_old[1].v[k] = un(rng) * 0.5;
    mu[0].v[k] = umu(rng);
    mu[1].v[k] = umu(rng);
    T_old.v[k] = ut(rng);
    T_new.v[k] = ut(rng);
  }

  SUBCASE("uniform potentials give zero fluxes") {
    std::vector<CellField> mu0 = {CellField(g, 123.0), CellField(g, -7.0)};
    CellField Tu(g, 310.0);
    auto J = diffusion_fluxes(mass_spec(), mix, g, n_old, T_old, mu0, Tu, gh);
    CHECK(grid::max_abs(J[0]) == 0.0);
    CHECK(grid::max_abs(J[1]) == 0.0);
  }

  SUBCASE("molar model: sum of fluxes vanishes on every face") {
    auto J = diffusion_fluxes(molar_spec(), mix, g, n_old, T_old, mu, T_new, gh);
    double worst = 0.0, scale = 0.0;
    for (size_t k = 0; k < J[0].x.size(); ++k) {
      worst = std::max(worst, std::abs(J[0].x[k] + J[1].x[k]));
      scale = std::max(scale, std::abs(J[0].x[k]));
    }
    for (size_t k = 0; k < J[0].y.size(); ++k) {
      worst = std::max(worst, std::abs(J[0].y[k] + J[1].y[k]));
      scale = std::max(scale, std::abs(J[0].y[k]));
    }
    CHECK(scale > 0.0);
    CHECK(worst <= 1e-13 * scale);
  }

  SUBCASE("mass model: Mw-weighted sum vanishes on every face") {
    const double mw1 = mix.components[0].Mw, mw2 = mix.components[1].Mw;
    auto J = diffusion_fluxes(mass_spec(), mix, g, n_old, T_old, mu, T_new, gh);
    double worst = 0.0, scale = 0.0;
    for (size_t k = 0; k < J[0].x.size(); ++k) {
      worst = std::max(worst, std::abs(mw1 * J[0].x[k] + mw2 * J[1].x[k]));
      scale = std::max(scale, std::abs(mw1 * J[0].x[k]));
    }
    for (size_t k = 0; k < J[0].y.size(); ++k) {
      worst = std::max(worst, std::abs(mw1 * J[0].y[k] + mw2 * J[1].y[k]));
      scale = std::max(scale, std::abs(mw1 * J[0].y[k]));
    }
    CHECK(scale > 0.0);
    CHECK(worst <= 1e-13 * scale);
  }

  SUBCASE("boundary faces carry no flux") {
    auto J = diffusion_fluxes(mass_spec(), mix, g, n_old, T_old, mu, T_new, gh);
    for (int j = 0; j < g.ny; ++j) {
      CHECK(J[0].fx(0, j) == 0.0);
      CHECK(J[0].fx(g.nx, j) == 0.0);
    }
  }

  SUBCASE("entropy production of the flux pair is nonnegative") {
    // sum_faces [ <q, grad(1/T)> - sum_i <J_i, grad((mu_i + Mw gh)/T)> ] >= 0
    auto spec = mass_spec();
    auto J = diffusion_fluxes(spec, mix, g, n_old, T_old, mu, T_new, gh);
    FaceField q = heat_flux(spec, g, n_old, T_new);

    CellField invT(g);
    for (int k = 0; k < g.cells(); ++k) invT.v[k] = 1.0 / T_new.v[k];
    FaceField ginvT = grid::grad(g, invT);

    std::vector<FaceField> gG(2);
    for (int b = 0; b < 2; ++b) {
      CellField G(g);
      for (int k = 0; k < g.cells(); ++k)
        G.v[k] = (mu[b].v[k] + mix.components[b].Mw * gh.v[k]) / T_new.v[k];
      gG[b] = grid::grad(g, G);
    }

    double prod = 0.0;
    for (size_t k = 0; k < q.x.size(); ++k) {
      prod += q.x[k] * ginvT.x[k];
      for (int b = 0; b < 2; ++b) prod -= J[b].x[k] * gG[b].x[k];
    }
    for (size_t k = 0; k < q.y.size(); ++k) {
      prod += q.y[k] * ginvT.y[k];
      for (int b = 0; b < 2; ++b) prod -= J[b].y[k] * gG[b].y[k];
    }
    CHECK(prod >= -1e-12 * std::abs(prod));
  }
}

TEST_CASE("heat_flux") {
  const Mixture mix = fixtures::methane_pentane();
  Grid2D g{10, 8, 0.25e-9, 0.25e-9, BcMode::neumann};
  std::vector<CellField> n_old = {CellField(g, 4.0e3), CellField(g, 2.0e3)};

  SUBCASE("uniform temperature gives zero flux") {
    CHECK(grid::max_abs(heat_flux(mass_spec(), g, n_old, CellField(g, 310.0))) == 0.0);
  }

  SUBCASE("linear temperature gives constant interior flux") {
    CellField T(g);
    const double slope = 2.0e9;  // [K/m]
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) T(i, j) = 300.0 + slope * (i + 0.5) * g.hx;
    FaceField q = heat_flux(mass_spec(), g, n_old, T);
    const double K = 1e-3 * 6.0e3;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 1; i < g.nx; ++i)
        CHECK(q.fx(i, j) == doctest::Approx(-K * slope).epsilon(1e-12));
  }

  SUBCASE("production sign for random positive temperature") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> ut(250.0, 400.0);
    CellField T(g);
    for (double& t : T.v) t = ut(rng);
    FaceField q = heat_flux(mass_spec(), g, n_old, T);
    CellField invT(g);
    for (int k = 0; k < g.cells(); ++k) invT.v[k] = 1.0 / T.v[k];
    FaceField gi = grid::grad(g, invT);
    double prod = 0.0;
    for (size_t k = 0; k < q.x.size(); ++k) prod += q.x[k] * gi.x[k];
    for (size_t k = 0; k < q.y.size(); ++k) prod += q.y[k] * gi.y[k];
    CHECK(prod >= 0.0);
  }

  SUBCASE("rejects nonpositive temperature") {
    CHECK_THROWS_AS(heat_flux(mass_spec(), g, n_old, CellField(g, -1.0)), DomainError);
  }
}
