#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "prflow/config.hpp"
#include "prflow/errors.hpp"
#include "prflow/output.hpp"
#include "prflow/run.hpp"
#include "prflow/selfcheck.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

// exit codes: 0 success, 1 usage/config error, 2 solver failure, 3 selfcheck failure
constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSolver = 2;
constexpr int kExitSelfcheck = 3;

std::vector<double> parse_vector(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

int cmd_eos(const std::string& config_path, const std::string& nvec, double T) {
  using namespace prflow;
  const RunConfig cfg = config::parse_file(config_path);
  const Mixture& mix = cfg.mix;
  BulkState s{parse_vector(nvec), T};
  if (int(s.n.size()) != mix.size())
    throw ValidationError("--n must list one molar density per component");

  const auto part = [&](thermo::FePart pp) { return thermo::f_bulk(mix, s, pp); };
  const auto mu = thermo::mu_bulk(mix, s, cfg.scheme.theta, thermo::MuPart::total);
  const auto muc = thermo::mu_bulk(mix, s, cfg.scheme.theta, thermo::MuPart::convex);
  const auto muk = thermo::mu_bulk(mix, s, cfg.scheme.theta, thermo::MuPart::concave);

  std::printf("state: T = %.6f K, n = [", T);
  for (size_t i = 0; i < s.n.size(); ++i)
    std::printf("%s%.17g", i ? ", " : "", s.n[i]);
  std::printf("] mol/m^3\n\n");
  std::printf("%-28s %24s %s\n", "quantity", "value", "unit");
  std::printf("%-28s %24.16e %s\n", "f_bulk ideal", part(thermo::FePart::ideal), "J/m^3");
  std::printf("%-28s %24.16e %s\n", "f_bulk repulsion", part(thermo::FePart::repulsion),
              "J/m^3");
  std::printf("%-28s %24.16e %s\n", "f_bulk attraction", part(thermo::FePart::attraction),
              "J/m^3");
  std::printf("%-28s %24.16e %s\n", "f_bulk total", thermo::f_bulk(mix, s), "J/m^3");
  for (int i = 0; i < mix.size(); ++i) {
    std::printf("%-28s %24.16e %s\n", ("mu_" + mix.components[i].name).c_str(), mu[i],
                "J/mol");
    std::printf("%-28s %24.16e %s\n", ("  convex part " + mix.components[i].name).c_str(),
                muc[i], "J/mol");
    std::printf("%-28s %24.16e %s\n", ("  concave part " + mix.components[i].name).c_str(),
                muk[i], "J/mol");
  }
  std::printf("%-28s %24.16e %s\n", "pressure", thermo::p_bulk(mix, s), "Pa");
  std::printf("%-28s %24.16e %s\n", "entropy density", thermo::s_bulk(mix, s), "J/(m^3 K)");
  std::printf("%-28s %24.16e %s\n", "internal energy density",
              thermo::u_internal_bulk(mix, s), "J/m^3");
  std::printf("%-28s %24.16e %s\n", "d2f/dT2", thermo::d2f_dT2(mix, s), "J/(m^3 K^2)");

  // identity row: p - (sum n mu - f) should vanish
  double snmu = -thermo::f_bulk(mix, s);
  for (int i = 0; i < mix.size(); ++i) snmu += s.n[i] * mu[i];
  std::printf("%-28s %24.16e %s\n", "p - (sum n mu - f)", thermo::p_bulk(mix, s) - snmu,
              "Pa");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prflow: entropy-stable diffuse-interface two-phase flow solver"};
  app.require_subcommand(1);

  std::string config_path, out_dir, filter, nvec;
  double T = 0.0;
  int threads = 1;
  bool as_json = false;

  CLI::App* sim = app.add_subcommand("simulate", "run a simulation from a config file");
  sim->add_option("--config", config_path, "JSON configuration file")->required();
  sim->add_option("--out", out_dir, "output directory (overrides the config)");
  sim->add_option("--threads", threads, "OpenMP threads for the field kernels (1 = serial)");

  CLI::App* check = app.add_subcommand("selfcheck", "run the built-in verification suite");
  check->add_option("--filter", filter, "only run checks whose name contains this substring");
  check->add_flag("--json", as_json, "machine-readable JSON output");

  CLI::App* eos = app.add_subcommand("eos", "evaluate the equation of state at one state");
  eos->add_option("--config", config_path, "JSON configuration file (mixture definition)")
      ->required();
  eos->add_option("--n", nvec, "comma-separated molar densities [mol/m^3]")->required();
  eos->add_option("--T", T, "temperature [K]")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (sim->parsed()) {
      if (threads > 1) {
#ifdef _OPENMP
        omp_set_num_threads(threads);
        prflow::set_default_exec(prflow::Exec::openmp);
#else
        prflow::output::log(prflow::output::LogLevel::info,
                            "built without OpenMP; running serial");
#endif
      }
      const prflow::RunConfig cfg = prflow::config::parse_file(config_path);
      return prflow::run::run_simulation(cfg, out_dir);
    }
    if (check->parsed()) {
      prflow::selfcheck::Options opt;
      opt.filter = filter;
      const auto results = prflow::selfcheck::run_all(opt);
      std::cout << (as_json ? prflow::selfcheck::format_json(results)
                            : prflow::selfcheck::format_text(results));
      return prflow::selfcheck::all_passed(results) ? kExitOk : kExitSelfcheck;
    }
    if (eos->parsed()) return cmd_eos(config_path, nvec, T);
  } catch (const prflow::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitConfig;
}
