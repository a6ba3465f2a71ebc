#include "prflow/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "prflow/errors.hpp"
#include "prflow/output.hpp"

namespace prflow::config {

using nlohmann::json;

namespace {

const std::map<std::string, std::map<std::string, double>>& unit_tables() {
  static const std::map<std::string, std::map<std::string, double>> tables = {
      {"K", {{"K", 1.0}}},
      {"Pa", {{"Pa", 1.0}, {"kPa", 1e3}, {"MPa", 1e6}, {"bar", 1e5}, {"atm", 101325.0}}},
      {"mol/m^3", {{"mol/m^3", 1.0}, {"kmol/m^3", 1e3}}},
      {"kg/mol", {{"kg/mol", 1.0}, {"g/mol", 1e-3}}},
      {"m", {{"m", 1.0}, {"cm", 1e-2}, {"mm", 1e-3}, {"um", 1e-6}, {"nm", 1e-9}}},
      {"s", {{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}, {"ps", 1e-12}, {"fs", 1e-15}}},
      {"m^2/s", {{"m^2/s", 1.0}, {"cm^2/s", 1e-4}}},
      {"J*m^5/mol^2", {{"J*m^5/mol^2", 1.0}}},
      {"J*m^2/(mol*s*K)", {{"J*m^2/(mol*s*K)", 1.0}}},
      {"Pa*s", {{"Pa*s", 1.0}}},
      {"m/s^2", {{"m/s^2", 1.0}}},
      {"J/mol", {{"J/mol", 1.0}, {"kJ/mol", 1e3}}},
      {"J/(mol*K)", {{"J/(mol*K)", 1.0}}},
  };
  return tables;
}

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ValidationError("config: " + where + ": " + what);
}

double quantity(const json& j, const std::string& dim, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string()) fail(where, "expected a number (SI) or a \"value unit\" string");
  const std::string s = j.get<std::string>();
  std::istringstream is(s);
  double value;
  std::string unit;
  if (!(is >> value)) fail(where, "cannot parse quantity '" + s + "'");
  is >> unit;
  if (unit.empty()) return value;
  const auto& table = unit_tables().at(dim);
  auto it = table.find(unit);
  if (it == table.end()) {
    std::string accepted;
    for (const auto& [u, f] : table) accepted += (accepted.empty() ? "" : ", ") + u;
    fail(where, "unknown unit '" + unit + "' (accepted: " + accepted + ")");
  }
  return value * it->second;
}

const json& need(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing field '") + key + "'");
  return *it;
}

std::vector<double> matrix(const json& j, int m, const std::string& dim,
                           const std::string& where) {
  if (!j.is_array() || int(j.size()) != m) fail(where, "expected an MxM array");
  std::vector<double> out;
  out.reserve(size_t(m) * m);
  for (int r = 0; r < m; ++r) {
    const json& row = j[r];
    if (!row.is_array() || int(row.size()) != m) fail(where, "expected an MxM array");
    for (int c = 0; c < m; ++c)
      out.push_back(quantity(row[c], dim, where + "[" + std::to_string(r) + "][" +
                                              std::to_string(c) + "]"));
  }
  return out;
}

}  // namespace

RunConfig parse_text(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("config: " + origin + ": " + e.what());
  }

  RunConfig cfg;

  // mixture
  const json& jm = need(root, "mixture", origin);
  const json& jcomps = need(jm, "components", "mixture");
  if (!jcomps.is_array() || jcomps.empty()) fail("mixture.components", "expected a nonempty array");
  const int m = int(jcomps.size());
  for (int i = 0; i < m; ++i) {
    const std::string where = "mixture.components[" + std::to_string(i) + "]";
    const json& jc = jcomps[i];
    Component c;
    c.name = need(jc, "name", where).get<std::string>();
    const std::string named = where + " (" + c.name + ")";
    c.Tc = quantity(need(jc, "Tc", named), "K", named + ".Tc");
    c.Pc = quantity(need(jc, "Pc", named), "Pa", named + ".Pc");
    c.omega = need(jc, "omega", named).get<double>();
    c.Mw = quantity(need(jc, "Mw", named), "kg/mol", named + ".Mw");
    const json& ja = need(jc, "cp_alpha", named);
    if (!ja.is_array() || ja.size() != 4) fail(named + ".cp_alpha", "expected 4 coefficients");
    for (int k = 0; k < 4; ++k) c.alpha[k] = ja[k].get<double>();
    cfg.mix.components.push_back(std::move(c));
  }
  cfg.mix.kij = matrix(need(jm, "kij", "mixture"), m, "-", "mixture.kij");
  cfg.mix.cij = matrix(need(jm, "cij", "mixture"), m, "J*m^5/mol^2", "mixture.cij");
  const json& jref = need(jm, "reference", "mixture");
  cfg.mix.T0 = quantity(need(jref, "T0", "mixture.reference"), "K", "mixture.reference.T0");
  cfg.mix.P0 = quantity(need(jref, "P0", "mixture.reference"), "Pa", "mixture.reference.P0");
  cfg.mix.theta0 =
      quantity(need(jref, "theta0", "mixture.reference"), "J/mol", "mixture.reference.theta0");
  cfg.mix.s0 =
      quantity(need(jref, "s0", "mixture.reference"), "J/(mol*K)", "mixture.reference.s0");
  if (jm.contains("R")) cfg.mix.R = jm["R"].get<double>();

  // grid
  const json& jg = need(root, "grid", origin);
  cfg.grid.nx = need(jg, "nx", "grid").get<int>();
  cfg.grid.ny = need(jg, "ny", "grid").get<int>();
  cfg.Lx = quantity(need(jg, "Lx", "grid"), "m", "grid.Lx");
  cfg.Ly = quantity(need(jg, "Ly", "grid"), "m", "grid.Ly");
  if (cfg.grid.nx < 2 || cfg.grid.ny < 2) fail("grid", "nx and ny must be at least 2");
  if (!(cfg.Lx > 0.0) || !(cfg.Ly > 0.0)) fail("grid", "Lx and Ly must be positive");
  cfg.grid.hx = cfg.Lx / cfg.grid.nx;
  cfg.grid.hy = cfg.Ly / cfg.grid.ny;
  const std::string bc = jg.value("bc", std::string("neumann"));
  if (bc == "neumann")
    cfg.grid.bc = BcMode::neumann;
  else if (bc == "periodic")
    cfg.grid.bc = BcMode::periodic;
  else
    fail("grid.bc", "expected 'neumann' or 'periodic'");

  // scheme
  const json& js = need(root, "scheme", origin);
  cfg.scheme.dt = quantity(need(js, "dt", "scheme"), "s", "scheme.dt");
  cfg.scheme.theta = js.value("theta", 0.0);
  if (js.contains("lambda")) cfg.scheme.lambda = quantity(js["lambda"], "Pa*s", "scheme.lambda");
  if (js.contains("eta")) cfg.scheme.eta = quantity(js["eta"], "Pa*s", "scheme.eta");
  if (js.contains("gravity"))
    cfg.scheme.gravity = quantity(js["gravity"], "m/s^2", "scheme.gravity");
  cfg.scheme.outer_tol = js.value("outer_tol", 1e-10);
  cfg.scheme.outer_max = js.value("outer_max", 50);
  cfg.scheme.inner_newton_tol = js.value("inner_newton_tol", 1e-12);
  cfg.scheme.inner_newton_max = js.value("inner_newton_max", 30);
  cfg.scheme.T_recovery_tol = js.value("T_recovery_tol", 1e-12);
  if (js.contains("T_min")) cfg.scheme.T_min = quantity(js["T_min"], "K", "scheme.T_min");
  if (js.contains("T_max")) cfg.scheme.T_max = quantity(js["T_max"], "K", "scheme.T_max");

  // transport
  const json& jt = need(root, "transport", origin);
  const std::string model = need(jt, "model", "transport").get<std::string>();
  if (model == "mass" || model == "J2")
    cfg.mobility.model = FluxModel::mass;
  else if (model == "molar" || model == "J1")
    cfg.mobility.model = FluxModel::molar;
  else
    fail("transport.model", "expected 'mass'/'J2' or 'molar'/'J1'");
  cfg.mobility.D = matrix(need(jt, "D", "transport"), m, "m^2/s", "transport.D");
  cfg.mobility.kappa0 = quantity(need(jt, "kappa0", "transport"), "J*m^2/(mol*s*K)",
                                 "transport.kappa0");

  // initial condition
  const json& ji = need(root, "initial", origin);
  cfg.initial.T = quantity(need(ji, "T", "initial"), "K", "initial.T");
  if (ji.contains("field_file")) {
    cfg.initial.field_file = ji["field_file"].get<std::string>();
  } else {
    auto phase = [&](const char* key) {
      const json& jp = need(ji, key, "initial");
      std::vector<double> out(m);
      for (int i = 0; i < m; ++i) {
        const std::string& name = cfg.mix.components[i].name;
        out[i] = quantity(need(jp, name.c_str(), "initial." + std::string(key)), "mol/m^3",
                          "initial." + std::string(key) + "." + name);
      }
      return out;
    };
    cfg.initial.inside = phase("inside");
    cfg.initial.outside = phase("outside");
    const json& jd = need(ji, "droplet", "initial");
    cfg.initial.x0 = quantity(need(jd, "x0", "initial.droplet"), "m", "initial.droplet.x0");
    cfg.initial.y0 = quantity(need(jd, "y0", "initial.droplet"), "m", "initial.droplet.y0");
    cfg.initial.x1 = quantity(need(jd, "x1", "initial.droplet"), "m", "initial.droplet.x1");
    cfg.initial.y1 = quantity(need(jd, "y1", "initial.droplet"), "m", "initial.droplet.y1");
  }

  // run
  const json& jr = need(root, "run", origin);
  cfg.run.steps = need(jr, "steps", "run").get<int>();
  if (cfg.run.steps < 0) fail("run.steps", "must be >= 0");
  cfg.run.snapshot_every = jr.value("snapshot_every", 0);
  cfg.run.output_dir = jr.value("output", std::string("out"));
  cfg.run.vtk = jr.value("vtk", false);
  cfg.run.shape_component = m - 1;
  if (jr.contains("shape_component")) {
    const std::string name = jr["shape_component"].get<std::string>();
    cfg.run.shape_component = -1;
    for (int i = 0; i < m; ++i)
      if (cfg.mix.components[i].name == name) cfg.run.shape_component = i;
    if (cfg.run.shape_component < 0)
      fail("run.shape_component", "unknown component '" + name + "'");
  }

  // full invariant validation through the module types
  cfg.mix.validate(cfg.scheme.T_min, cfg.scheme.T_max);
  cfg.scheme.validate();
  cfg.mobility.validate(m);
  if (cfg.initial.field_file.empty()) {
    if (!(cfg.initial.T > 0.0)) fail("initial.T", "must be positive");
    for (int i = 0; i < m; ++i) {
      if (!(cfg.initial.inside[i] > 0.0) || !(cfg.initial.outside[i] > 0.0))
        fail("initial", "molar densities must be positive");
    }
  }
  return cfg;
}

RunConfig parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str(), path);
}

std::string emit(const RunConfig& cfg) {
  json root;
  json comps = json::array();
  for (const Component& c : cfg.mix.components) {
    comps.push_back({{"name", c.name},
                     {"Tc", c.Tc},
                     {"Pc", c.Pc},
                     {"omega", c.omega},
                     {"Mw", c.Mw},
                     {"cp_alpha", c.alpha}});
  }
  const int m = cfg.mix.size();
  auto mat = [&](const std::vector<double>& v) {
    json rows = json::array();
    for (int r = 0; r < m; ++r) {
      json row = json::array();
      for (int c = 0; c < m; ++c) row.push_back(v[size_t(r) * m + c]);
      rows.push_back(row);
    }
    return rows;
  };
  root["mixture"] = {{"components", comps},
                     {"kij", mat(cfg.mix.kij)},
                     {"cij", mat(cfg.mix.cij)},
                     {"reference",
                      {{"T0", cfg.mix.T0},
                       {"P0", cfg.mix.P0},
                       {"theta0", cfg.mix.theta0},
                       {"s0", cfg.mix.s0}}},
                     {"R", cfg.mix.R}};
  root["grid"] = {{"nx", cfg.grid.nx},
                  {"ny", cfg.grid.ny},
                  {"Lx", cfg.Lx},
                  {"Ly", cfg.Ly},
                  {"bc", cfg.grid.bc == BcMode::periodic ? "periodic" : "neumann"}};
  root["scheme"] = {{"dt", cfg.scheme.dt},
                    {"theta", cfg.scheme.theta},
                    {"lambda", cfg.scheme.lambda},
                    {"eta", cfg.scheme.eta},
                    {"gravity", cfg.scheme.gravity},
                    {"outer_tol", cfg.scheme.outer_tol},
                    {"outer_max", cfg.scheme.outer_max},
                    {"inner_newton_tol", cfg.scheme.inner_newton_tol},
                    {"inner_newton_max", cfg.scheme.inner_newton_max},
                    {"T_recovery_tol", cfg.scheme.T_recovery_tol},
                    {"T_min", cfg.scheme.T_min},
                    {"T_max", cfg.scheme.T_max}};
  root["transport"] = {{"model", cfg.mobility.model == FluxModel::mass ? "mass" : "molar"},
                       {"D", mat(cfg.mobility.D)},
                       {"kappa0", cfg.mobility.kappa0}};
  json initial;
  initial["T"] = cfg.initial.T;
  if (!cfg.initial.field_file.empty()) {
    initial["field_file"] = cfg.initial.field_file;
  } else {
    json inside, outside;
    for (int i = 0; i < m; ++i) {
      inside[cfg.mix.components[i].name] = cfg.initial.inside[i];
      outside[cfg.mix.components[i].name] = cfg.initial.outside[i];
    }
    initial["inside"] = inside;
    initial["outside"] = outside;
    initial["droplet"] = {{"x0", cfg.initial.x0},
                          {"y0", cfg.initial.y0},
                          {"x1", cfg.initial.x1},
                          {"y1", cfg.initial.y1}};
  }
  root["initial"] = initial;
  root["run"] = {{"steps", cfg.run.steps},
                 {"snapshot_every", cfg.run.snapshot_every},
                 {"output", cfg.run.output_dir},
                 {"vtk", cfg.run.vtk},
                 {"shape_component", cfg.mix.components[cfg.run.shape_component].name}};
  return root.dump(2) + "\n";
}

Problem build_problem(const RunConfig& cfg) {
  Problem p;
  p.mix = cfg.mix;
  p.grid = cfg.grid;
  p.mobility = cfg.mobility;
  p.scheme = cfg.scheme;
  p.gh = CellField(p.grid);
  for (int j = 0; j < p.grid.ny; ++j)
    for (int i = 0; i < p.grid.nx; ++i)
      p.gh(i, j) = cfg.scheme.gravity * (j + 0.5) * p.grid.hy;
  p.validate();
  return p;
}

SimState initial_state(const RunConfig& cfg, const Problem& p) {
  SimState s;
  s.t = 0.0;
  if (!cfg.initial.field_file.empty()) {
    s = output::read_snapshot(cfg.initial.field_file, p);
    return s;
  }
  const Grid2D& g = p.grid;
  const int m = p.mix.size();
  s.n.assign(m, CellField(g));
  s.T = CellField(g, cfg.initial.T);
  s.u = FaceField(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double x = (i + 0.5) * g.hx, y = (j + 0.5) * g.hy;
      const bool in = x >= cfg.initial.x0 && x <= cfg.initial.x1 && y >= cfg.initial.y0 &&
                      y <= cfg.initial.y1;
      for (int c = 0; c < m; ++c)
        s.n[c](i, j) = in ? cfg.initial.inside[c] : cfg.initial.outside[c];
    }
  return s;
}

}  // namespace prflow::config
