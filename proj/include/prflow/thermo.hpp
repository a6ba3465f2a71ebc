#pragma once

#include <array>
#include <string>
#include <vector>

#include "prflow/errors.hpp"

namespace prflow {

// One chemical species: critical constants, acentric factor, molar weight and
// ideal-gas heat-capacity correlation psi^p(T) = sum_k alpha[k] T^k.
struct Component {
  std::string name;
  double Tc = 0.0;     // critical temperature [K]
  double Pc = 0.0;     // critical pressure [Pa]
  double omega = 0.0;  // acentric factor [-]
  double Mw = 0.0;     // molar weight [kg/mol]
  std::array<double, 4> alpha{};  // [J/(mol K^{k+1})]
};

// The M-component system with Peng-Robinson binary interaction coefficients,
// influence parameters and the reference-state constants of the free energy.
struct Mixture {
  std::vector<Component> components;
  std::vector<double> kij;  // M x M, row-major [-]
  std::vector<double> cij;  // M x M, row-major [J m^5/mol^2]
  double T0 = 298.15;       // reference temperature [K]
  double P0 = 1.0e5;        // reference pressure [Pa]
  double theta0 = 0.0;      // reference internal energy [J/mol]
  double s0 = 0.0;          // reference entropy [J/(mol K)]
  double R = 8.31446261815324;  // [J/(mol K)]

  // Test hook: scales the attraction parameter a(T) and its T-derivatives.
  // 1.0 for physical runs; 0.0 reduces the EOS to its ideal+repulsion part.
  double attraction_scale = 1.0;

  int size() const { return int(components.size()); }
  double k(int i, int j) const { return kij[size_t(i) * components.size() + j]; }
  double c(int i, int j) const { return cij[size_t(i) * components.size() + j]; }

  // Checks all type invariants; Tlo/Thi bound the operating temperature range
  // over which psi^p > R is required. Throws ValidationError.
  void validate(double Tlo = 100.0, double Thi = 1000.0) const;
};

// Point thermodynamic state: molar densities [mol/m^3] and temperature [K].
struct BulkState {
  std::vector<double> n;
  double T = 0.0;
};

// Mixture Peng-Robinson parameters at fixed composition.
struct MixParams {
  double a = 0.0;        // [Pa m^6/mol^2]
  double da_dT = 0.0;    // [Pa m^6/(mol^2 K)]
  double d2a_dT2 = 0.0;  // [Pa m^6/(mol^2 K^2)]
  double b = 0.0;        // [m^3/mol]
};

namespace thermo {

inline constexpr double kLogDomainMargin = 1e-12;

// Peng-Robinson m(omega); first branch for omega <= 0.49.
double m_coeff(double omega);

struct PureParams {
  double a = 0.0;  // [Pa m^6/mol^2]
  double b = 0.0;  // [m^3/mol]
};
PureParams pure_params(const Component& comp, double T, double R);

// Van der Waals mixing rule with exact analytic T-derivatives of a.
MixParams mix_params(const Mixture& mix, const std::vector<double>& n, double T);

// Ideal-gas heat capacity psi^p(T) [J/(mol K)].
double psi_p(const Component& comp, double T);

// Closed form of int_{T0}^{T} psi^p(xi)/xi dxi.
double cp_integral(const Component& comp, double T, double T0);

enum class FePart { ideal, repulsion, attraction, stab };

// Named contribution to the bulk Helmholtz free energy density [J/m^3].
double f_bulk(const Mixture& mix, const BulkState& s, FePart part);
// Total bulk free energy density: ideal + repulsion + attraction.
double f_bulk(const Mixture& mix, const BulkState& s);
double f_bulk_raw(const Mixture& mix, const double* n, double T);

struct SplitValue {
  double convex = 0.0;
  double concave = 0.0;
};
// Convex-concave split: convex = ideal + repulsion + theta*stab,
// concave = attraction - theta*stab; convex + concave == f_bulk.
SplitValue f_bulk_split(const Mixture& mix, const BulkState& s, double theta);

enum class MuPart { convex, concave, total };

// Analytic chemical potentials d f_part / d n_i at fixed T [J/mol].
std::vector<double> mu_bulk(const Mixture& mix, const BulkState& s, double theta, MuPart part);
void mu_bulk_into(const Mixture& mix, const double* n, double T, double theta, MuPart part,
                  double* out);

// Bulk pressure sum_i n_i mu_i^b - f_b [Pa]; coincides with the
// Peng-Robinson pressure at homogeneous states.
double p_bulk(const Mixture& mix, const BulkState& s);

// Bulk entropy density [J/(m^3 K)].
double s_bulk(const Mixture& mix, const BulkState& s);
double s_bulk_raw(const Mixture& mix, const double* n, double T);

// Bulk internal energy density theta_b = f_b + T s_b [J/m^3].
double u_internal_bulk(const Mixture& mix, const BulkState& s);
double u_internal_bulk_raw(const Mixture& mix, const double* n, double T);

// d theta_b / dT at fixed n: the volumetric constant-volume heat capacity
// [J/(m^3 K)], strictly positive.
double du_dT_bulk(const Mixture& mix, const double* n, double T);

// Second T-derivative of f_b at fixed n [J/(m^3 K^2)]; <= 0 (concavity in T).
double d2f_dT2(const Mixture& mix, const BulkState& s);
// Same with externally supplied mixture parameters (term-isolation hook).
double d2f_dT2_from(const Mixture& mix, const BulkState& s, const MixParams& params);

// Hessian of the convex split part w.r.t. n at fixed T, M x M row-major
// [J m^3/mol^2]. Positive definite on the admissible domain.
void convex_hessian_into(const Mixture& mix, const double* n, double T, double theta, double* h);
std::vector<double> convex_hessian(const Mixture& mix, const BulkState& s, double theta);

// Throws DomainError unless n_i > 0, T > 0, b n < 1 and b_i n_i < 1.
void check_domain(const Mixture& mix, const double* n, double T);
inline void check_domain(const Mixture& mix, const BulkState& s) {
  check_domain(mix, s.n.data(), s.T);
}

}  // namespace thermo
}  // namespace prflow
