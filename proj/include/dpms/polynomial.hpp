#pragma once

// Dense univariate polynomials over the complex numbers, stored as ascending
// coefficient vectors.  Root extraction goes through the companion matrix and
// is polished by Newton; every returned root carries a residual certificate
// relative to the coefficient scale.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpms/configuration.hpp"
#include "dpms/errors.hpp"

namespace dpms {

inline Complex poly_eval(const std::vector<Complex>& c, Complex z) {
  Complex acc = 0.0;
  for (size_t k = c.size(); k-- > 0;) acc = acc * z + c[k];
  return acc;
}

inline std::vector<Complex> poly_derivative(const std::vector<Complex>& c) {
  std::vector<Complex> d;
  for (size_t k = 1; k < c.size(); ++k)
    d.push_back(static_cast<double>(k) * c[k]);
  return d;
}

inline std::vector<Complex> poly_multiply(const std::vector<Complex>& a,
                                          const std::vector<Complex>& b) {
  if (a.empty() || b.empty()) return {};
  std::vector<Complex> out(a.size() + b.size() - 1, Complex(0.0));
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

// Backward-error scale for a residual of p at z: sum_k |c_k| |z|^k.
inline double poly_residual_scale(const std::vector<Complex>& c, Complex z) {
  double acc = 0.0;
  double zk = 1.0;
  const double az = std::abs(z);
  for (const Complex& ck : c) {
    acc += std::abs(ck) * zk;
    zk *= az;
  }
  return std::max(acc, 1e-300);
}

// All roots of the polynomial with ascending coefficients c (leading
// coefficient nonzero), via companion-matrix eigenvalues plus Newton polish.
// Results are sorted by modulus, then argument.  Throws NumericalFailure if
// any polished root fails the relative residual certificate.
inline std::vector<Complex> poly_roots(const std::vector<Complex>& c,
                                       double certify_tol = 1e-12) {
  if (c.size() < 2) {
    throw std::invalid_argument("poly_roots: degree must be at least 1");
  }
  double cmax = 0.0;
  for (const Complex& ck : c) cmax = std::max(cmax, std::abs(ck));
  if (!(std::abs(c.back()) > 0.0) || cmax == 0.0) {
    throw std::invalid_argument("poly_roots: leading coefficient is zero");
  }
  const size_t n = c.size() - 1;
  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(
      static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (size_t i = 1; i < n; ++i) {
    companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) =
        1.0;
  }
  for (size_t i = 0; i < n; ++i) {
    companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n - 1)) =
        -c[i] / c.back();
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("poly_roots: eigenvalue iteration failed");
  }

  const std::vector<Complex> dc = poly_derivative(c);
  std::vector<Complex> roots;
  roots.reserve(n);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    Complex z = solver.eigenvalues()(i);
    for (int iter = 0; iter < 32; ++iter) {
      const Complex pz = poly_eval(c, z);
      const Complex dz = poly_eval(dc, z);
      if (std::abs(dz) == 0.0) break;
      const Complex step = pz / dz;
      z -= step;
      if (std::abs(step) <= 1e-16 * (1.0 + std::abs(z))) break;
    }
    if (std::abs(poly_eval(c, z)) > certify_tol * poly_residual_scale(c, z)) {
      throw NumericalFailure("poly_roots: root residual exceeds certificate, " +
                             std::to_string(std::abs(poly_eval(c, z))));
    }
    roots.push_back(z);
  }
  std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
    const double ma = std::abs(a);
    const double mb = std::abs(b);
    if (ma != mb) return ma < mb;
    return std::arg(a) < std::arg(b);
  });
  return roots;
}

}  // namespace dpms
