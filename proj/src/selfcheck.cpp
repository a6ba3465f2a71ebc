#include "prflow/selfcheck.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "prflow/diagnostics.hpp"
#include "prflow/stepper.hpp"
#include "prflow/transport.hpp"

namespace prflow::selfcheck {

namespace {

Mixture reference_mixture() {
  Mixture mix;
  mix.components = {
      {"methane", 190.56, 45.99e5, 0.011, 16.04e-3, {19.25, 5.213e-2, 1.197e-5, -1.132e-8}},
      {"pentane", 469.7, 33.70e5, 0.251, 72.15e-3, {-3.626, 4.873e-1, -2.580e-4, 5.305e-8}}};
  mix.kij = {0.0, 0.041, 0.041, 0.0};
  mix.cij = {0.0282e-18, 0.0462e-18, 0.0462e-18, 0.3019e-18};
  mix.T0 = 298.15;
  mix.P0 = 1.0e5;
  mix.theta0 = -2478.95687512;
  mix.s0 = 59.5827;
  return mix;
}

std::vector<BulkState> sample_states(const Mixture& mix, int count, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> un(10.0, 1.2e4), ut(250.0, 400.0);
  std::vector<double> bi(mix.size());
  for (int i = 0; i < mix.size(); ++i)
    bi[i] = 0.07780 * mix.R * mix.components[i].Tc / mix.components[i].Pc;
  std::vector<BulkState> out;
  while (int(out.size()) < count) {
    BulkState s;
    s.n.resize(mix.size());
    double bn = 0.0;
    for (int i = 0; i < mix.size(); ++i) {
      s.n[i] = un(rng);
      bn += bi[i] * s.n[i];
    }
    if (bn >= 0.95) continue;
    s.T = ut(rng);
    out.push_back(std::move(s));
  }
  return out;
}

double rel(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

Problem tiny_droplet() {
  Problem p;
  p.mix = reference_mixture();
  const double L = 20e-9;
  p.grid = {12, 12, L / 12, L / 12, BcMode::neumann};
  p.mobility.model = FluxModel::mass;
  p.mobility.D = {0.0, 1e-8, 1e-8, 0.0};
  p.mobility.kappa0 = 1e-3;
  p.scheme.dt = 1e-12;
  p.gh = CellField(p.grid, 0.0);
  return p;
}

SimState tiny_droplet_state(const Problem& p) {
  SimState s;
  s.n = {CellField(p.grid), CellField(p.grid)};
  s.T = CellField(p.grid, 310.0);
  s.u = FaceField(p.grid);
  const double L = p.grid.nx * p.grid.hx;
  for (int j = 0; j < p.grid.ny; ++j)
    for (int i = 0; i < p.grid.nx; ++i) {
      const double x = (i + 0.5) * p.grid.hx, y = (j + 0.5) * p.grid.hy;
      const bool in = x >= 0.25 * L && x <= 0.75 * L && y >= 0.25 * L && y <= 0.75 * L;
      s.n[0](i, j) = in ? 6.8663e3 : 7.4302e3;
      s.n[1](i, j) = in ? 4.7915e3 : 0.6736e3;
    }
  return s;
}

using CheckFn = std::function<CheckResult(const Options&)>;

CheckResult check_mu_fd(const Options& opt) {
  const Mixture mix = reference_mixture();
  auto eval_mu = [&](const BulkState& s) {
    if (opt.mu_override) return opt.mu_override(mix, s);
    return thermo::mu_bulk(mix, s, 0.0, thermo::MuPart::total);
  };
  double worst = 0.0;
  for (const BulkState& s : sample_states(mix, 100, 101)) {
    const auto mu = eval_mu(s);
    for (int i = 0; i < mix.size(); ++i) {
      const double h = 1e-6 * s.n[i];
      BulkState sp = s, sm = s;
      sp.n[i] += h;
      sm.n[i] -= h;
      const double fd = (thermo::f_bulk(mix, sp) - thermo::f_bulk(mix, sm)) / (2.0 * h);
      worst = std::max(worst, rel(mu[i], fd));
    }
  }
  return {"thermo.mu_vs_fd", worst < 1e-6,
          "max_rel_err=" + num(worst) + " states=100 tol=1e-6"};
}

CheckResult check_s_fd(const Options&) {
  const Mixture mix = reference_mixture();
  double worst = 0.0;
  for (const BulkState& s : sample_states(mix, 100, 102)) {
    BulkState sp = s, sm = s;
    sp.T += 1e-3;
    sm.T -= 1e-3;
    const double fd = (thermo::f_bulk(mix, sp) - thermo::f_bulk(mix, sm)) / 2e-3;
    worst = std::max(worst, rel(thermo::s_bulk(mix, s), -fd));
  }
  return {"thermo.s_vs_fd", worst < 1e-6, "max_rel_err=" + num(worst) + " states=100 tol=1e-6"};
}

CheckResult check_identities(const Options&) {
  const Mixture mix = reference_mixture();
  double worst_u = 0.0, worst_p = 0.0;
  for (const BulkState& s : sample_states(mix, 100, 103)) {
    const double f = thermo::f_bulk(mix, s);
    worst_u = std::max(worst_u,
                       rel(thermo::u_internal_bulk(mix, s), f + s.T * thermo::s_bulk(mix, s)));
    const auto mu = thermo::mu_bulk(mix, s, 0.0, thermo::MuPart::total);
    double snmu = -f;
    for (int i = 0; i < mix.size(); ++i) snmu += s.n[i] * mu[i];
    worst_p = std::max(worst_p, rel(thermo::p_bulk(mix, s), snmu));
  }
  return {"thermo.identities", worst_u < 1e-10 && worst_p < 1e-10,
          "theta=f+Ts err=" + num(worst_u) + " p=sum(n mu)-f err=" + num(worst_p) +
              " tol=1e-10"};
}

CheckResult check_concavity(const Options&) {
  const Mixture mix = reference_mixture();
  double worst_d2 = -1e300, worst_fd = 0.0, min_a2 = 1e300;
  const auto states = sample_states(mix, 1000, 104);
  for (const BulkState& s : states) {
    const double d2 = thermo::d2f_dT2(mix, s);
    worst_d2 = std::max(worst_d2, d2);
    min_a2 = std::min(min_a2, thermo::mix_params(mix, s.n, s.T).d2a_dT2);
  }
  for (const BulkState& s : sample_states(mix, 20, 105)) {
    BulkState sp = s, sm = s;
    sp.T += 0.05;
    sm.T -= 0.05;
    const double fd = (thermo::f_bulk(mix, sp) - 2.0 * thermo::f_bulk(mix, s) +
                       thermo::f_bulk(mix, sm)) /
                      (0.05 * 0.05);
    worst_fd = std::max(worst_fd, rel(thermo::d2f_dT2(mix, s), fd));
  }
  return {"thermo.concavity_in_T", worst_d2 <= 0.0 && worst_fd < 1e-5 && min_a2 > 0.0,
          "samples=1000 max_d2f_dT2=" + num(worst_d2) + " min_a''=" + num(min_a2) +
              " fd_err=" + num(worst_fd)};
}

CheckResult check_convex_hessian(const Options&) {
  const Mixture mix = reference_mixture();
  double worst = 1e300;
  for (const BulkState& s : sample_states(mix, 100, 106)) {
    const auto h = thermo::convex_hessian(mix, s, 0.0);
    Eigen::MatrixXd hm(2, 2);
    hm << h[0], h[1], h[2], h[3];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hm);
    worst = std::min(worst, es.eigenvalues().minCoeff() / hm.trace());
  }
  return {"thermo.convex_split_psd", worst >= -1e-8,
          "min_eig/trace=" + num(worst) + " states=100 tol=-1e-8"};
}

CheckResult check_mobility(const Options&) {
  const Mixture mix = reference_mixture();
  MobilitySpec spec;
  spec.D = {0.0, 1e-8, 1e-8, 0.0};
  spec.kappa0 = 1e-3;
  double min_eig = 1e300, worst_null = 0.0;
  for (FluxModel model : {FluxModel::molar, FluxModel::mass}) {
    spec.model = model;
    for (const BulkState& s : sample_states(mix, 100, 107)) {
      const auto L = transport::mobility(spec, mix, s);
      Eigen::MatrixXd lm(2, 2);
      lm << L[0], L[1], L[2], L[3];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lm);
      const double norm = lm.cwiseAbs().maxCoeff();
      min_eig = std::min(min_eig, es.eigenvalues().minCoeff() / norm);
      if (model == FluxModel::molar) {
        worst_null = std::max(worst_null, std::abs(L[0] + L[1]) / norm);
      } else {
        worst_null = std::max(
            worst_null,
            std::abs(mix.components[0].Mw * L[0] + mix.components[1].Mw * L[2]) /
                (mix.components[0].Mw * norm));
      }
    }
  }
  return {"transport.mobility_psd", min_eig >= -1e-14 && worst_null < 1e-13,
          "min_eig/norm=" + num(min_eig) + " null_defect=" + num(worst_null)};
}

CheckResult check_grid_sbp(const Options&) {
  Grid2D g{14, 11, 0.3, 0.7, BcMode::neumann};
  std::mt19937 rng(108);
  std::uniform_real_distribution<double> ur(-1.0, 1.0);
  CellField f(g);
  for (double& v : f.v) v = ur(rng);
  FaceField F(g);
  for (double& v : F.x) v = ur(rng);
  for (double& v : F.y) v = ur(rng);
  for (int j = 0; j < g.ny; ++j) F.fx(0, j) = F.fx(g.nx, j) = 0.0;
  for (int i = 0; i < g.nx; ++i) F.fy(i, 0) = F.fy(i, g.ny) = 0.0;

  const CellField d = grid::div(g, F);
  const FaceField gf = grid::grad(g, f);
  double sum = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) sum += f(i, j) * d(i, j);
  for (size_t k = 0; k < gf.x.size(); ++k) sum += gf.x[k] * F.x[k];
  for (size_t k = 0; k < gf.y.size(); ++k) sum += gf.y[k] * F.y[k];
  sum *= g.cell_volume();
  const double cons = grid::integrate(g, d);
  return {"grid.summation_by_parts", std::abs(sum) < 1e-12 && std::abs(cons) < 1e-12,
          "sbp_defect=" + num(sum) + " div_integral=" + num(cons) + " tol=1e-12"};
}

CheckResult check_fixed_point(const Options&) {
  Problem p = tiny_droplet();
  SimState s;
  s.n = {CellField(p.grid, 5.0e3), CellField(p.grid, 2.0e3)};
  s.T = CellField(p.grid, 310.0);
  s.u = FaceField(p.grid);
  double worst = 0.0;
  for (int k = 0; k < 2; ++k) {
    auto [next, rep] = stepper::step(p, s);
    for (int i = 0; i < 2; ++i)
      worst = std::max(worst, grid::max_abs_diff(next.n[i], s.n[i]) / 5.0e3);
    worst = std::max(worst, grid::max_abs_diff(next.T, s.T) / 310.0);
    s = std::move(next);
  }
  return {"stepper.uniform_fixed_point", worst < 1e-12,
          "max_rel_change=" + num(worst) + " steps=2 tol=1e-12"};
}

CheckResult check_entropy_laws(const Options&) {
  Problem p = tiny_droplet();
  SimState s = tiny_droplet_state(p);
  double S_prev = diagnostics::total_entropy(p, s);
  const double E0 = diagnostics::total_energy(p, s);
  const auto m0 = diagnostics::species_totals(p.grid, s);
  double worst_dS = 0.0, worst_E = 0.0, worst_m = 0.0;
  for (int k = 0; k < 3; ++k) {
    auto [next, rep] = stepper::step(p, s);
    const double S = diagnostics::total_entropy(p, next);
    worst_dS = std::min(worst_dS, (S - S_prev) / std::abs(S_prev));
    worst_E = std::max(worst_E, rel(diagnostics::total_energy(p, next), E0));
    const auto mm = diagnostics::species_totals(p.grid, next);
    for (int i = 0; i < 2; ++i) worst_m = std::max(worst_m, rel(mm[i], m0[i]));
    S_prev = S;
    s = std::move(next);
  }
  return {"stepper.thermodynamic_laws",
          worst_dS >= -1e-12 && worst_E < 1e-10 && worst_m < 1e-11,
          "steps=3 min_dS_rel=" + num(worst_dS) + " energy_drift=" + num(worst_E) +
              " mole_drift=" + num(worst_m)};
}

}  // namespace

std::vector<CheckResult> run_all(const Options& opt) {
  const std::vector<std::pair<std::string, CheckFn>> checks = {
      {"thermo.mu_vs_fd", check_mu_fd},
      {"thermo.s_vs_fd", check_s_fd},
      {"thermo.identities", check_identities},
      {"thermo.concavity_in_T", check_concavity},
      {"thermo.convex_split_psd", check_convex_hessian},
      {"transport.mobility_psd", check_mobility},
      {"grid.summation_by_parts", check_grid_sbp},
      {"stepper.uniform_fixed_point", check_fixed_point},
      {"stepper.thermodynamic_laws", check_entropy_laws},
  };
  std::vector<CheckResult> out;
  for (const auto& [name, fn] : checks) {
    if (!opt.filter.empty() && name.find(opt.filter) == std::string::npos) continue;
    out.push_back(fn(opt));
  }
  return out;
}

std::string format_text(const std::vector<CheckResult>& results) {
  std::string s;
  for (const CheckResult& r : results)
    s += (r.pass ? "PASS " : "FAIL ") + r.name + " " + r.detail + "\n";
  return s;
}

std::string format_json(const std::vector<CheckResult>& results) {
  nlohmann::json arr = nlohmann::json::array();
  for (const CheckResult& r : results)
    arr.push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
  return arr.dump(2) + "\n";
}

bool all_passed(const std::vector<CheckResult>& results) {
  for (const CheckResult& r : results)
    if (!r.pass) return false;
  return true;
}

}  // namespace prflow::selfcheck
