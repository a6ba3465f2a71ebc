// Test-only numerical oracles: finite differences, adaptive quadrature and
// eigenvalue checks. Independent of the library implementation paths they are
// used to verify.
#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

inline double central_diff(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double second_diff(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

// Adaptive Simpson quadrature with absolute/relative tolerance.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-12, int depth = 40) {
  std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double x0, double x2, double f0, double f1, double f2, double whole, int d) {
        const double x1 = 0.5 * (x0 + x2);
        const double xl = 0.5 * (x0 + x1), xr = 0.5 * (x1 + x2);
        const double fl = f(xl), fr = f(xr);
        const double h6 = (x2 - x0) / 12.0;
        const double left = h6 * (f0 + 4.0 * fl + f1);
        const double right = h6 * (f1 + 4.0 * fr + f2);
        const double delta = left + right - whole;
        if (d <= 0 || std::abs(delta) <= 15.0 * tol * (1.0 + std::abs(left + right)))
          return left + right + delta / 15.0;
        return rec(x0, x1, f0, fl, f1, left, d - 1) + rec(x1, x2, f1, fr, f2, right, d - 1);
      };
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return rec(a, b, fa, fm, fb, whole, depth);
}

// Symmetric finite-difference Hessian of a scalar function of a vector.
inline Eigen::MatrixXd fd_hessian(const std::function<double(const std::vector<double>&)>& f,
                                  std::vector<double> x, double rel_step = 1e-5) {
  const int m = int(x.size());
  Eigen::MatrixXd h(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double hi = rel_step * std::abs(x[i]);
      const double hj = rel_step * std::abs(x[j]);
      std::vector<double> xpp = x, xpm = x, xmp = x, xmm = x;
      xpp[i] += hi; xpp[j] += hj;
      xpm[i] += hi; xpm[j] -= hj;
      xmp[i] -= hi; xmp[j] += hj;
      xmm[i] -= hi; xmm[j] -= hj;
      h(i, j) = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * hi * hj);
    }
  }
  return 0.5 * (h + h.transpose());
}

inline double min_eigenvalue(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  return es.eigenvalues().minCoeff();
}

inline double rel_err(double got, double want) {
  const double scale = std::max(std::abs(want), 1e-300);
  return std::abs(got - want) / scale;
}

}  // namespace oracles
