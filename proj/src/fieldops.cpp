#include "prflow/fieldops.hpp"

#include <cmath>
#include <sstream>

namespace prflow::fieldops {

namespace {

// gathers one cell's molar densities into thread-local scratch
struct CellGather {
  const std::vector<CellField>& n;
  int m;
  const double* operator()(int idx) const {
    thread_local std::vector<double> buf;
    buf.resize(m);
    for (int i = 0; i < m; ++i) buf[i] = n[i].v[idx];
    return buf.data();
  }
};

}  // namespace

CellField mass_density(const Mixture& mix, const std::vector<CellField>& n, Exec ex) {
  const int m = mix.size();
  CellField rho(n[0].nx, n[0].ny);
  par_for(ex, rho.size(), [&](int idx) {
    double r = 0.0;
    for (int i = 0; i < m; ++i) r += mix.components[i].Mw * n[i].v[idx];
    rho.v[idx] = r;
  });
  return rho;
}

CellField s_bulk(const Mixture& mix, const std::vector<CellField>& n, const CellField& T,
                 Exec ex) {
  CellGather gather{n, mix.size()};
  CellField out(T.nx, T.ny);
  par_for(ex, out.size(), [&](int idx) {
    out.v[idx] = thermo::s_bulk_raw(mix, gather(idx), T.v[idx]);
  });
  return out;
}

CellField f_bulk(const Mixture& mix, const std::vector<CellField>& n, const CellField& T,
                 Exec ex) {
  CellGather gather{n, mix.size()};
  CellField out(T.nx, T.ny);
  par_for(ex, out.size(), [&](int idx) {
    out.v[idx] = thermo::f_bulk_raw(mix, gather(idx), T.v[idx]);
  });
  return out;
}

CellField u_internal(const Mixture& mix, const std::vector<CellField>& n, const CellField& T,
                     Exec ex) {
  CellGather gather{n, mix.size()};
  CellField out(T.nx, T.ny);
  par_for(ex, out.size(), [&](int idx) {
    out.v[idx] = thermo::u_internal_bulk_raw(mix, gather(idx), T.v[idx]);
  });
  return out;
}

std::vector<CellField> mu_bulk_split(const Mixture& mix, const std::vector<CellField>& n_new,
                                     const std::vector<CellField>& n_old, const CellField& T,
                                     double theta, Exec ex) {
  const int m = mix.size();
  std::vector<CellField> mu(m, CellField(T.nx, T.ny));
  par_for(ex, T.size(), [&](int idx) {
    thread_local std::vector<double> nn, no, mc, mk;
    nn.resize(m);
    no.resize(m);
    mc.resize(m);
    mk.resize(m);
    for (int i = 0; i < m; ++i) {
      nn[i] = n_new[i].v[idx];
      no[i] = n_old[i].v[idx];
    }
    thermo::mu_bulk_into(mix, nn.data(), T.v[idx], theta, thermo::MuPart::convex, mc.data());
    thermo::mu_bulk_into(mix, no.data(), T.v[idx], theta, thermo::MuPart::concave, mk.data());
    for (int i = 0; i < m; ++i) mu[i].v[idx] = mc[i] + mk[i];
  });
  return mu;
}

CellField gradient_energy(const Mixture& mix, const Grid2D& g, const std::vector<CellField>& n,
                          Exec ex) {
  const int m = mix.size();
  std::vector<FaceField> gn(m);
  for (int i = 0; i < m; ++i) gn[i] = grid::grad(g, n[i], ex);

  CellField out(g);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double w = 0.5 * mix.c(i, j);
      if (w == 0.0) continue;
      const CellField dij = grid::dot_faces(g, gn[i], gn[j], ex);
      par_for(ex, out.size(), [&](int idx) { out.v[idx] += w * dij.v[idx]; });
    }
  }
  return out;
}

CellField kinetic_energy(const Grid2D& g, const CellField& rho, const FaceField& u, Exec ex) {
  const CellField u2 = grid::dot_faces(g, u, u, ex);
  CellField out(g);
  par_for(ex, out.size(), [&](int idx) { out.v[idx] = 0.5 * rho.v[idx] * u2.v[idx]; });
  return out;
}

void check_fields(const Mixture& mix, const std::vector<CellField>& n, const CellField& T) {
  const int m = mix.size();
  std::vector<double> buf(m);
  for (int idx = 0; idx < T.size(); ++idx) {
    for (int i = 0; i < m; ++i) buf[i] = n[i].v[idx];
    try {
      thermo::check_domain(mix, buf.data(), T.v[idx]);
    } catch (const DomainError& e) {
      std::ostringstream os;
      os << e.what() << " at cell (" << idx % T.nx << ", " << idx / T.nx << ")";
      throw DomainError(os.str());
    }
  }
}

}  // namespace prflow::fieldops
