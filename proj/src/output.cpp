#include "prflow/output.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "prflow/errors.hpp"

namespace prflow::output {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write '" + tmp.string() + "'");
    out << content;
  }
  fs::rename(tmp, target);
}

std::string csv_header(const Mixture& mix) {
  std::string h = "step,time,S_total,E_total";
  for (const Component& c : mix.components) h += ",moles_" + c.name;
  h += ",kinetic_energy,max_velocity,shape_metric\n";
  return h;
}

std::string csv_row(const DiagnosticsRecord& r) {
  std::string row = std::to_string(r.step) + "," + fmt17(r.t) + "," + fmt17(r.S_total) + "," +
                    fmt17(r.E_total);
  for (double m : r.moles) row += "," + fmt17(m);
  row += "," + fmt17(r.kinetic) + "," + fmt17(r.max_u) + "," + fmt17(r.shape) + "\n";
  return row;
}

namespace {

void emit_values(std::ostringstream& os, const std::vector<double>& v, int per_row) {
  for (size_t k = 0; k < v.size(); ++k) {
    os << fmt17(v[k]);
    os << ((int(k) % per_row == per_row - 1) ? '\n' : ' ');
  }
}

}  // namespace

std::string snapshot_text(const Problem& p, const SimState& s) {
  const Grid2D& g = p.grid;
  std::ostringstream os;
  os << "prflow-snapshot 1\n";
  os << "nx " << g.nx << " ny " << g.ny << " hx " << fmt17(g.hx) << " hy " << fmt17(g.hy)
     << " time " << fmt17(s.t) << "\n";
  for (int i = 0; i < p.mix.size(); ++i) {
    os << "field n_" << p.mix.components[i].name << " cell\n";
    emit_values(os, s.n[i].v, g.nx);
  }
  os << "field T cell\n";
  emit_values(os, s.T.v, g.nx);
  os << "field u_x facex\n";
  emit_values(os, s.u.x, g.nx + 1);
  os << "field u_y facey\n";
  emit_values(os, s.u.y, g.nx);
  os << "end\n";
  return os.str();
}

SimState read_snapshot(const std::string& path, const Problem& p) {
  std::ifstream in(path);
  if (!in) throw ValidationError("snapshot: cannot open '" + path + "'");
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "prflow-snapshot" || version != 1)
    throw ValidationError("snapshot: '" + path + "' is not a prflow snapshot");
  std::string key;
  int nx = 0, ny = 0;
  double hx = 0, hy = 0, time = 0;
  in >> key >> nx >> key >> ny >> key >> hx >> key >> hy >> key >> time;
  if (nx != p.grid.nx || ny != p.grid.ny)
    throw ValidationError("snapshot: grid dimensions do not match the configuration");

  SimState s;
  s.t = time;
  s.n.assign(p.mix.size(), CellField(p.grid));
  s.T = CellField(p.grid);
  s.u = FaceField(p.grid);

  std::string word, name, kind;
  while (in >> word && word == "field") {
    in >> name >> kind;
    std::vector<double>* dst = nullptr;
    if (kind == "cell") {
      if (name == "T") {
        dst = &s.T.v;
      } else {
        for (int i = 0; i < p.mix.size(); ++i)
          if (name == "n_" + p.mix.components[i].name) dst = &s.n[i].v;
      }
    } else if (kind == "facex" && name == "u_x") {
      dst = &s.u.x;
    } else if (kind == "facey" && name == "u_y") {
      dst = &s.u.y;
    }
    if (dst == nullptr) throw ValidationError("snapshot: unexpected field '" + name + "'");
    for (double& v : *dst)
      if (!(in >> v)) throw ValidationError("snapshot: truncated field '" + name + "'");
  }
  if (word != "end") throw ValidationError("snapshot: missing end marker");
  return s;
}

std::string snapshot_vtk(const Problem& p, const SimState& s) {
  const Grid2D& g = p.grid;
  std::ostringstream os;
  os << "# vtk DataFile Version 2.0\n";
  os << "prflow state t=" << fmt17(s.t) << "\n";
  os << "ASCII\n";
  os << "DATASET STRUCTURED_POINTS\n";
  os << "DIMENSIONS " << g.nx + 1 << " " << g.ny + 1 << " 1\n";
  os << "ORIGIN 0 0 0\n";
  os << "SPACING " << fmt17(g.hx) << " " << fmt17(g.hy) << " 1\n";
  os << "CELL_DATA " << g.cells() << "\n";
  for (int i = 0; i < p.mix.size(); ++i) {
    os << "SCALARS n_" << p.mix.components[i].name << " double 1\n";
    os << "LOOKUP_TABLE default\n";
    for (double v : s.n[i].v) os << fmt17(v) << "\n";
  }
  os << "SCALARS T double 1\n";
  os << "LOOKUP_TABLE default\n";
  for (double v : s.T.v) os << fmt17(v) << "\n";
  os << "VECTORS velocity double\n";
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double ux = 0.5 * (s.u.fx(i, j) + s.u.fx(i + 1, j));
      const double uy = 0.5 * (s.u.fy(i, j) + s.u.fy(i, j + 1));
      os << fmt17(ux) << " " << fmt17(uy) << " 0\n";
    }
  return os.str();
}

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("PRFLOW_LOG");
    if (env == nullptr) return LogLevel::info;
    const std::string v(env);
    if (v == "quiet" || v == "0") return LogLevel::quiet;
    if (v == "debug" || v == "2") return LogLevel::debug;
    return LogLevel::info;
  }();
  return level;
}

void log(LogLevel at, const std::string& msg) {
  if (int(log_level()) >= int(at)) std::cerr << msg << "\n";
}

}  // namespace prflow::output
