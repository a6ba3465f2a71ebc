#include "prflow/thermo.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

namespace prflow {

void Mixture::validate(double Tlo, double Thi) const {
  const int m = size();
  if (m < 1) throw ValidationError("mixture must contain at least one component");
  if (R <= 0.0) throw ValidationError("gas constant R must be positive");
  if (T0 <= 0.0 || P0 <= 0.0) throw ValidationError("reference state T0, P0 must be positive");

  for (const Component& c : components) {
    if (c.Tc <= 0.0) throw ValidationError("component " + c.name + ": Tc must be positive");
    if (c.Pc <= 0.0) throw ValidationError("component " + c.name + ": Pc must be positive");
    if (c.Mw <= 0.0) throw ValidationError("component " + c.name + ": Mw must be positive");
    // psi^p(T) > R over the operating range, so psi^v = psi^p - R stays positive.
    for (double T = Tlo; T <= Thi + 0.5; T += 1.0) {
      const double psi = c.alpha[0] + T * (c.alpha[1] + T * (c.alpha[2] + T * c.alpha[3]));
      if (psi <= R) {
        std::ostringstream os;
        os << "component " << c.name << ": ideal-gas heat capacity psi^p(" << T
           << " K) = " << psi << " J/(mol K) does not exceed R";
        throw ValidationError(os.str());
      }
    }
  }

  if (int(kij.size()) != m * m) throw ValidationError("kij must be M x M");
  if (int(cij.size()) != m * m) throw ValidationError("cij must be M x M");
  for (int i = 0; i < m; ++i) {
    if (k(i, i) != 0.0) throw ValidationError("kij diagonal must be zero");
    for (int j = 0; j < m; ++j) {
      if (k(i, j) != k(j, i)) throw ValidationError("kij must be symmetric");
      if (k(i, j) >= 1.0) throw ValidationError("kij entries must be < 1");
      if (c(i, j) != c(j, i)) throw ValidationError("cij must be symmetric");
    }
  }
  Eigen::MatrixXd C(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) C(i, j) = c(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
  const double scale = std::max(C.cwiseAbs().maxCoeff(), 1e-300);
  if (es.eigenvalues().minCoeff() < -1e-12 * scale)
    throw ValidationError("cij must be positive semi-definite");
}

namespace thermo {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

struct Scratch {
  std::vector<double> bi, sa, dsa, d2sa, suma;
  void resize(int m) {
    bi.resize(m);
    sa.resize(m);
    dsa.resize(m);
    d2sa.resize(m);
    suma.resize(m);
  }
};
thread_local Scratch tls;

// All mixture-level Peng-Robinson quantities at one state, computed in a
// single pass. A2 = a(T) n^2 and B = b n are used instead of a and b so the
// expressions stay regular as n -> 0.
struct Ctx {
  int M;
  double R, T, T0, P0;
  double N = 0.0;     // total molar density
  double B = 0.0;     // sum b_i n_i
  double A2 = 0.0;    // sum n_i n_j (1-k_ij) sqrt(a_i a_j), attraction-scaled
  double A2p = 0.0;   // dA2/dT
  double A2pp = 0.0;  // d2A2/dT2
  double L = 0.0;     // ln((1+(1-sqrt2)B)/(1+(1+sqrt2)B)), < 0
  double Dq = 0.0;    // 1 + 2B - B^2
  double G = 0.0;     // L/(2 sqrt2 B)
  const double* bi;
  const double* suma;  // suma[i] = sum_j (1-k_ij) sa_i sa_j n_j, attraction-scaled
};

// sum_k alpha_k (T^{k+1} - T0^{k+1})/(k+1), the ideal-gas enthalpy integral.
double enthalpy_int(const Component& cp, double T, double T0) {
  double powT = 1.0, powT0 = 1.0, s = 0.0;
  for (int k = 0; k < 4; ++k) {
    powT *= T;
    powT0 *= T0;
    s += cp.alpha[k] * (powT - powT0) / double(k + 1);
  }
  return s;
}

Ctx make_ctx(const Mixture& mix, const double* n, double T) {
  const int m = mix.size();
  tls.resize(m);
  Ctx c;
  c.M = m;
  c.R = mix.R;
  c.T = T;
  c.T0 = mix.T0;
  c.P0 = mix.P0;

  for (int i = 0; i < m; ++i) {
    const Component& cp = mix.components[i];
    const double mi = m_coeff(cp.omega);
    const double s0a = std::sqrt(0.45724) * mix.R * cp.Tc / std::sqrt(cp.Pc);
    const double str = std::sqrt(T / cp.Tc);
    tls.bi[i] = 0.07780 * mix.R * cp.Tc / cp.Pc;
    tls.sa[i] = s0a * (1.0 + mi * (1.0 - str));
    tls.dsa[i] = -s0a * mi / (2.0 * std::sqrt(T * cp.Tc));
    tls.d2sa[i] = s0a * mi / (4.0 * T * std::sqrt(T * cp.Tc));
    c.N += n[i];
    c.B += tls.bi[i] * n[i];
    tls.suma[i] = 0.0;
  }
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double w = n[i] * n[j] * (1.0 - mix.k(i, j));
      c.A2 += w * tls.sa[i] * tls.sa[j];
      c.A2p += w * (tls.dsa[i] * tls.sa[j] + tls.sa[i] * tls.dsa[j]);
      c.A2pp += w * (tls.d2sa[i] * tls.sa[j] + 2.0 * tls.dsa[i] * tls.dsa[j] +
                     tls.sa[i] * tls.d2sa[j]);
      tls.suma[i] += (1.0 - mix.k(i, j)) * tls.sa[i] * tls.sa[j] * n[j];
    }
  }
  const double chi = mix.attraction_scale;
  c.A2 *= chi;
  c.A2p *= chi;
  c.A2pp *= chi;
  for (int i = 0; i < m; ++i) tls.suma[i] *= chi;

  c.L = std::log1p((1.0 - kSqrt2) * c.B) - std::log1p((1.0 + kSqrt2) * c.B);
  c.Dq = 1.0 + 2.0 * c.B - c.B * c.B;
  c.G = (c.B > 0.0) ? c.L / (2.0 * kSqrt2 * c.B) : -1.0;  // L/(2 sqrt2 B) -> -1 as B -> 0
  c.bi = tls.bi.data();
  c.suma = tls.suma.data();
  return c;
}

double f_ideal(const Mixture& mix, const Ctx& c, const double* n) {
  double f = c.N * mix.theta0 - c.N * mix.s0 * c.T - c.N * c.R * (c.T - c.T0);
  for (int i = 0; i < c.M; ++i) {
    const Component& cp = mix.components[i];
    f += n[i] * enthalpy_int(cp, c.T, c.T0);
    f -= n[i] * c.R * c.T * std::log(c.P0 / (n[i] * c.R * c.T));
    f -= n[i] * c.T * cp_integral(cp, c.T, c.T0);
  }
  return f;
}

double f_repulsion(const Ctx& c) { return -c.N * c.R * c.T * std::log1p(-c.B); }

double f_attraction(const Ctx& c) { return c.A2 * c.G; }

double f_stab(const Mixture& mix, const Ctx& c, const double* n) {
  double f = 0.0;
  for (int i = 0; i < c.M; ++i)
    f += n[i] * (std::log(n[i]) - 1.0) - n[i] * std::log1p(-c.bi[i] * n[i]);
  return c.R * c.T * f;
}

void mu_ideal_repulsion(const Mixture& mix, const Ctx& c, const double* n, double* mu) {
  const double log_rep = -c.R * c.T * std::log1p(-c.B);
  const double rep_lin = c.N * c.R * c.T / (1.0 - c.B);
  for (int i = 0; i < c.M; ++i) {
    const Component& cp = mix.components[i];
    mu[i] = mix.theta0 - mix.s0 * c.T + enthalpy_int(cp, c.T, c.T0) - c.R * (c.T - c.T0) -
            c.R * c.T * std::log(c.P0 / (n[i] * c.R * c.T)) + c.R * c.T -
            c.T * cp_integral(cp, c.T, c.T0);
    mu[i] += log_rep + rep_lin * c.bi[i];
  }
}

void mu_attraction(const Ctx& c, double* mu) {
  for (int i = 0; i < c.M; ++i) {
    mu[i] = 2.0 * c.suma[i] * c.G;
    if (c.B > 0.0)
      mu[i] += -c.A2 * c.bi[i] * c.G / c.B - c.A2 * c.bi[i] / (c.B * c.Dq);
  }
}

void mu_stab(const Ctx& c, const double* n, double* mu) {
  for (int i = 0; i < c.M; ++i) {
    const double bn = c.bi[i] * n[i];
    mu[i] = c.R * c.T *
            (std::log(n[i]) - std::log1p(-bn) + bn / (1.0 - bn));
  }
}

}  // namespace

double m_coeff(double omega) {
  if (omega <= 0.49)
    return 0.37464 + 1.54226 * omega - 0.26992 * omega * omega;
  return 0.379642 + 1.485030 * omega - 0.164423 * omega * omega +
         0.016666 * omega * omega * omega;
}

PureParams pure_params(const Component& comp, double T, double R) {
  const double m = m_coeff(comp.omega);
  const double br = 1.0 + m * (1.0 - std::sqrt(T / comp.Tc));
  PureParams p;
  p.a = 0.45724 * R * R * comp.Tc * comp.Tc / comp.Pc * br * br;
  p.b = 0.07780 * R * comp.Tc / comp.Pc;
  return p;
}

MixParams mix_params(const Mixture& mix, const std::vector<double>& n, double T) {
  if (T <= 0.0) throw DomainError("mix_params: T must be positive");
  double N = 0.0;
  for (double ni : n) N += ni;
  if (N <= 0.0) throw DomainError("mix_params: total molar density must be positive");
  const Ctx c = make_ctx(mix, n.data(), T);
  MixParams p;
  p.a = c.A2 / (N * N);
  p.da_dT = c.A2p / (N * N);
  p.d2a_dT2 = c.A2pp / (N * N);
  p.b = c.B / N;
  return p;
}

double psi_p(const Component& comp, double T) {
  return comp.alpha[0] + T * (comp.alpha[1] + T * (comp.alpha[2] + T * comp.alpha[3]));
}

double cp_integral(const Component& comp, double T, double T0) {
  return comp.alpha[0] * std::log(T / T0) + comp.alpha[1] * (T - T0) +
         comp.alpha[2] * (T * T - T0 * T0) / 2.0 +
         comp.alpha[3] * (T * T * T - T0 * T0 * T0) / 3.0;
}

void check_domain(const Mixture& mix, const double* n, double T) {
  if (!(T > 0.0)) throw DomainError("temperature must be positive");
  double B = 0.0;
  for (int i = 0; i < mix.size(); ++i) {
    if (!(n[i] > 0.0))
      throw DomainError("molar density of " + mix.components[i].name + " must be positive");
    const Component& cp = mix.components[i];
    const double bi = 0.07780 * mix.R * cp.Tc / cp.Pc;
    if (bi * n[i] >= 1.0 - kLogDomainMargin)
      throw DomainError("covolume limit b_i n_i >= 1 for " + mix.components[i].name);
    B += bi * n[i];
  }
  if (B >= 1.0 - kLogDomainMargin) throw DomainError("covolume limit b n >= 1");
}

double f_bulk(const Mixture& mix, const BulkState& s, FePart part) {
  check_domain(mix, s);
  const Ctx c = make_ctx(mix, s.n.data(), s.T);
  switch (part) {
    case FePart::ideal:
      return f_ideal(mix, c, s.n.data());
    case FePart::repulsion:
      return f_repulsion(c);
    case FePart::attraction:
      return f_attraction(c);
    case FePart::stab:
      return f_stab(mix, c, s.n.data());
  }
  return 0.0;
}

double f_bulk(const Mixture& mix, const BulkState& s) {
  check_domain(mix, s);
  const Ctx c = make_ctx(mix, s.n.data(), s.T);
  return f_ideal(mix, c, s.n.data()) + f_repulsion(c) + f_attraction(c);
}

double f_bulk_raw(const Mixture& mix, const double* n, double T) {
  const Ctx c = make_ctx(mix, n, T);
  return f_ideal(mix, c, n) + f_repulsion(c) + f_attraction(c);
}

SplitValue f_bulk_split(const Mixture& mix, const BulkState& s, double theta) {
  check_domain(mix, s);
  const Ctx c = make_ctx(mix, s.n.data(), s.T);
  const double stab = (theta != 0.0) ? f_stab(mix, c, s.n.data()) : 0.0;
  SplitValue v;
  v.convex = f_ideal(mix, c, s.n.data()) + f_repulsion(c) + theta * stab;
  v.concave = f_attraction(c) - theta * stab;
  return v;
}

void mu_bulk_into(const Mixture& mix, const double* n, double T, double theta, MuPart part,
                  double* out) {
  const int m = mix.size();
  const Ctx c = make_ctx(mix, n, T);
  thread_local std::vector<double> tmp;
  tmp.resize(m);
  switch (part) {
    case MuPart::convex:
      mu_ideal_repulsion(mix, c, n, out);
      if (theta != 0.0) {
        mu_stab(c, n, tmp.data());
        for (int i = 0; i < m; ++i) out[i] += theta * tmp[i];
      }
      break;
    case MuPart::concave:
      mu_attraction(c, out);
      if (theta != 0.0) {
        mu_stab(c, n, tmp.data());
        for (int i = 0; i < m; ++i) out[i] -= theta * tmp[i];
      }
      break;
    case MuPart::total:
      mu_ideal_repulsion(mix, c, n, out);
      mu_attraction(c, tmp.data());
      for (int i = 0; i < m; ++i) out[i] += tmp[i];
      break;
  }
}

std::vector<double> mu_bulk(const Mixture& mix, const BulkState& s, double theta, MuPart part) {
  check_domain(mix, s);
  std::vector<double> mu(mix.size());
  mu_bulk_into(mix, s.n.data(), s.T, theta, part, mu.data());
  return mu;
}

double p_bulk(const Mixture& mix, const BulkState& s) {
  check_domain(mix, s);
  const std::vector<double> mu = mu_bulk(mix, s, 0.0, MuPart::total);
  double p = -f_bulk(mix, s);
  for (int i = 0; i < mix.size(); ++i) p += s.n[i] * mu[i];
  return p;
}

double s_bulk_raw(const Mixture& mix, const double* n, double T) {
  const Ctx c = make_ctx(mix, n, T);
  double s = c.N * mix.s0 + c.N * c.R * std::log1p(-c.B);
  for (int i = 0; i < c.M; ++i) {
    s += n[i] * c.R * std::log(c.P0 / (n[i] * c.R * T));
    s += n[i] * cp_integral(mix.components[i], T, c.T0);
  }
  s -= c.A2p * c.G;
  return s;
}

double s_bulk(const Mixture& mix, const BulkState& s) {
  check_domain(mix, s);
  return s_bulk_raw(mix, s.n.data(), s.T);
}

double u_internal_bulk_raw(const Mixture& mix, const double* n, double T) {
  const Ctx c = make_ctx(mix, n, T);
  double u = c.N * mix.theta0 - c.N * c.R * (T - c.T0);
  for (int i = 0; i < c.M; ++i) u += n[i] * enthalpy_int(mix.components[i], T, c.T0);
  u += (c.A2 - T * c.A2p) * c.G;
  return u;
}

double u_internal_bulk(const Mixture& mix, const BulkState& s) {
  check_domain(mix, s);
  return u_internal_bulk_raw(mix, s.n.data(), s.T);
}

double du_dT_bulk(const Mixture& mix, const double* n, double T) {
  const Ctx c = make_ctx(mix, n, T);
  double cv = 0.0;
  for (int i = 0; i < c.M; ++i) cv += n[i] * (psi_p(mix.components[i], T) - c.R);
  cv -= T * c.A2pp * c.G;
  return cv;
}

double d2f_dT2(const Mixture& mix, const BulkState& s) {
  check_domain(mix, s);
  const Ctx c = make_ctx(mix, s.n.data(), s.T);
  double d2 = 0.0;
  for (int i = 0; i < c.M; ++i)
    d2 -= s.n[i] * (psi_p(mix.components[i], s.T) - c.R) / s.T;
  d2 += c.A2pp * c.G;
  return d2;
}

double d2f_dT2_from(const Mixture& mix, const BulkState& s, const MixParams& params) {
  check_domain(mix, s);
  double N = 0.0;
  for (double ni : s.n) N += ni;
  const double B = params.b * N;
  const double L = std::log1p((1.0 - kSqrt2) * B) - std::log1p((1.0 + kSqrt2) * B);
  double d2 = 0.0;
  for (int i = 0; i < mix.size(); ++i)
    d2 -= s.n[i] * (psi_p(mix.components[i], s.T) - mix.R) / s.T;
  if (B > 0.0) d2 += params.d2a_dT2 * N * N * L / (2.0 * kSqrt2 * B);
  return d2;
}

void convex_hessian_into(const Mixture& mix, const double* n, double T, double theta, double* h) {
  const int m = mix.size();
  const Ctx c = make_ctx(mix, n, T);
  const double RT = c.R * T;
  const double om = 1.0 - c.B;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      double v = RT * ((c.bi[i] + c.bi[j]) / om + c.N * c.bi[i] * c.bi[j] / (om * om));
      if (i == j) {
        v += RT / n[i];
        if (theta != 0.0) {
          const double bn = c.bi[i] * n[i];
          v += theta * RT *
               (1.0 / n[i] + 2.0 * c.bi[i] / (1.0 - bn) +
                n[i] * c.bi[i] * c.bi[i] / ((1.0 - bn) * (1.0 - bn)));
        }
      }
      h[size_t(i) * m + j] = v;
    }
  }
}

std::vector<double> convex_hessian(const Mixture& mix, const BulkState& s, double theta) {
  check_domain(mix, s);
  std::vector<double> h(size_t(mix.size()) * mix.size());
  convex_hessian_into(mix, s.n.data(), s.T, theta, h.data());
  return h;
}

}  // namespace thermo
}  // namespace prflow
