// Shared test fixtures: the methane-pentane system and random admissible
// thermodynamic states.
#pragma once

#include <random>
#include <vector>

#include "prflow/stepper.hpp"
#include "prflow/thermo.hpp"

namespace fixtures {

inline prflow::Component methane() {
  return {"methane", 190.56, 45.99e5, 0.011, 16.04e-3, {19.25, 5.213e-2, 1.197e-5, -1.132e-8}};
}

inline prflow::Component pentane() {
  return {"pentane", 469.7, 33.70e5, 0.251, 72.15e-3, {-3.626, 4.873e-1, -2.580e-4, 5.305e-8}};
}

inline prflow::Mixture methane_pentane() {
  prflow::Mixture mix;
  mix.components = {methane(), pentane()};
  mix.kij = {0.0, 0.041, 0.041, 0.0};
  mix.cij = {0.0282e-18, 0.0462e-18, 0.0462e-18, 0.3019e-18};
  mix.T0 = 298.15;
  mix.P0 = 1.0e5;
  mix.theta0 = -2478.95687512;
  mix.s0 = 59.5827;
  return mix;
}

inline prflow::Mixture methane_only() {
  prflow::Mixture mix;
  mix.components = {methane()};
  mix.kij = {0.0};
  mix.cij = {0.0282e-18};
  mix.T0 = 298.15;
  mix.P0 = 1.0e5;
  mix.theta0 = -2478.95687512;
  mix.s0 = 59.5827;
  return mix;
}

// Liquid / gas phase states used in the bundled two-phase example.
inline prflow::BulkState liquid_state() { return {{6.8663e3, 4.7915e3}, 310.0}; }
inline prflow::BulkState gas_state() { return {{7.4302e3, 0.6736e3}, 310.0}; }

// The bundled two-phase example: methane-pentane in a 20 nm box, liquid
// droplet in the center quarter, mass-average fluxes, K = n*1e-3, theta = 0,
// dt = 1e-12 s.
inline prflow::Problem droplet_problem(int nx = 40, int ny = 40) {
  prflow::Problem p;
  p.mix = methane_pentane();
  const double L = 20e-9;
  p.grid = {nx, ny, L / nx, L / ny, prflow::BcMode::neumann};
  p.mobility.model = prflow::FluxModel::mass;
  p.mobility.D = {0.0, 1e-8, 1e-8, 0.0};
  p.mobility.kappa0 = 1e-3;
  p.scheme.dt = 1e-12;
  p.scheme.theta = 0.0;
  p.scheme.lambda = 0.0;
  p.scheme.eta = 0.0;
  p.scheme.gravity = 0.0;
  p.gh = prflow::CellField(p.grid, 0.0);
  p.validate();
  return p;
}

inline prflow::SimState droplet_state(const prflow::Problem& p) {
  const auto& g = p.grid;
  prflow::SimState s;
  s.n = {prflow::CellField(g), prflow::CellField(g)};
  s.T = prflow::CellField(g, 310.0);
  s.u = prflow::FaceField(g);
  s.t = 0.0;
  const double L = g.nx * g.hx;
  const prflow::BulkState liq = liquid_state(), gas = gas_state();
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double x = (i + 0.5) * g.hx, y = (j + 0.5) * g.hy;
      const bool inside = x >= 0.25 * L && x <= 0.75 * L && y >= 0.25 * L && y <= 0.75 * L;
      s.n[0](i, j) = inside ? liq.n[0] : gas.n[0];
      s.n[1](i, j) = inside ? liq.n[1] : gas.n[1];
    }
  return s;
}

// Random states with n_i in [10, 1.2e4] mol/m^3 subject to b n < bn_cap and
// T in [250, 400] K.
inline std::vector<prflow::BulkState> random_states(const prflow::Mixture& mix, int count,
                                                    unsigned seed = 20260811,
                                                    double bn_cap = 0.95) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> un(10.0, 1.2e4), ut(250.0, 400.0);
  std::vector<double> bi(mix.size());
  for (int i = 0; i < mix.size(); ++i)
    bi[i] = 0.07780 * mix.R * mix.components[i].Tc / mix.components[i].Pc;

  std::vector<prflow::BulkState> out;
  while (int(out.size()) < count) {
    prflow::BulkState s;
    s.n.resize(mix.size());
    double bn = 0.0;
    for (int i = 0; i < mix.size(); ++i) {
      s.n[i] = un(rng);
      bn += bi[i] * s.n[i];
    }
    if (bn >= bn_cap) continue;
    s.T = ut(rng);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace fixtures
