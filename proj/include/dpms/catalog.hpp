#pragma once

// Closed-form balanced configurations and the gluing construction that
// concatenates two of them into a longer chain.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpms/configuration.hpp"
#include "dpms/errors.hpp"
#include "dpms/forces.hpp"
#include "dpms/polynomial.hpp"

namespace dpms {

// Largest admissible degree for the squared-binomial polynomials: the
// coefficients C(n,k)^2 stay exactly representable in 64-bit integers
// through n = 34; we cap at 30.
constexpr int kMaxHypergeomDegree = 30;

// Coefficients of p_n(z) = sum_k C(n,k)^2 z^k, exact.
inline std::vector<long long> hypergeom_coefficients(int n) {
  if (n < 1 || n > kMaxHypergeomDegree) {
    throw std::invalid_argument("hypergeom_coefficients: need 1 <= n <= " +
                                std::to_string(kMaxHypergeomDegree) +
                                ", got " + std::to_string(n));
  }
  std::vector<long long> binom(static_cast<size_t>(n) + 1, 0);
  binom[0] = 1;
  for (int row = 1; row <= n; ++row) {
    for (int k = row; k > 0; --k) binom[static_cast<size_t>(k)] += binom[static_cast<size_t>(k - 1)];
  }
  std::vector<long long> out(static_cast<size_t>(n) + 1);
  for (size_t k = 0; k < out.size(); ++k) out[k] = binom[k] * binom[k];
  return out;
}

inline std::vector<Complex> hypergeom_polynomial(int n) {
  std::vector<Complex> c;
  for (long long v : hypergeom_coefficients(n))
    c.push_back(static_cast<double>(v));
  return c;
}

// z(1-z) p_n''(z) + (1 + (2n-1) z) p_n'(z) - n^2 p_n(z).  Vanishes
// identically; evaluating it checks the coefficient table.
inline Complex ode_residual(int n, Complex z) {
  const auto p = hypergeom_polynomial(n);
  const auto dp = poly_derivative(p);
  const auto ddp = poly_derivative(dp);
  const double nn = static_cast<double>(n);
  return z * (1.0 - z) * poly_eval(ddp, z) +
         (1.0 + (2.0 * nn - 1.0) * z) * poly_eval(dp, z) -
         nn * nn * poly_eval(p, z);
}

// z(1-z) p_n''(z) + (1 + (2n-1) z) p_n'(z).  Equals n^2 p_n(z), so it
// vanishes exactly at the true roots; unlike |p_n(z)| it certifies a
// candidate root through the derivative structure alone.
inline Complex hypergeom_root_certificate(int n, Complex z) {
  const auto p = hypergeom_polynomial(n);
  const auto dp = poly_derivative(p);
  const auto ddp = poly_derivative(dp);
  const double nn = static_cast<double>(n);
  return z * (1.0 - z) * poly_eval(ddp, z) +
         (1.0 + (2.0 * nn - 1.0) * z) * poly_eval(dp, z);
}

// Scale against which the certificate value is judged: the same expression
// with every term replaced by its absolute value.
inline double hypergeom_certificate_scale(int n, Complex z) {
  const auto p = hypergeom_polynomial(n);
  const auto dp = poly_derivative(p);
  const auto ddp = poly_derivative(dp);
  const double nn = static_cast<double>(n);
  return std::abs(z * (1.0 - z)) * poly_residual_scale(ddp, z) +
         std::abs(1.0 + (2.0 * nn - 1.0) * z) * poly_residual_scale(dp, z) +
         nn * nn * poly_residual_scale(p, z);
}

namespace detail {

// Roots of p_n: simple, real, negative, closed under inversion, with -1 a
// root exactly when n is odd.  Returns them as certified doubles.
inline std::vector<double> hypergeom_real_roots(int n) {
  const auto p = hypergeom_polynomial(n);
  const auto dp = poly_derivative(p);
  std::vector<double> out;
  for (const Complex& z : poly_roots(p)) {
    if (std::abs(z.imag()) > 1e-8 * std::abs(z) || z.real() >= 0.0) {
      throw NumericalFailure(
          "hypergeom roots must be real and negative, got " +
          std::to_string(z.real()) + " + " + std::to_string(z.imag()) + "i");
    }
    double r = z.real();
    for (int iter = 0; iter < 8; ++iter) {
      const double num = poly_eval(p, r).real();
      const double den = poly_eval(dp, r).real();
      if (den == 0.0) break;
      const double step = num / den;
      r -= step;
      if (std::abs(step) <= 1e-16 * (1.0 + std::abs(r))) break;
    }
    if (std::abs(hypergeom_root_certificate(n, r)) >
        1e-9 * hypergeom_certificate_scale(n, r)) {
      throw NumericalFailure("hypergeom root failed the certificate at " +
                             std::to_string(r));
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace detail

// Two-level chain: a single point 1 over the n roots of p_n, no period.
// The roots are ordered so the first floor(n/2) have modulus below one
// (ascending), each is followed at offset floor(n/2) by its reciprocal
// partner, and -1 sits last when n is odd.
inline Configuration build_handles(int n) {
  auto roots = detail::hypergeom_real_roots(n);
  std::sort(roots.begin(), roots.end(),
            [](double a, double b) { return std::abs(a) < std::abs(b); });
  const size_t h = static_cast<size_t>(n) / 2;
  std::vector<Complex> ordered;
  for (size_t j = 0; j < h; ++j) ordered.emplace_back(roots[j]);
  for (size_t j = 0; j < h; ++j) {
    // Partner of the j-th smallest root: the computed root nearest 1/a_j.
    const double target = 1.0 / roots[j];
    double best = 0.0;
    double bestdist = 1e300;
    for (size_t m = h; m < roots.size(); ++m) {
      if (std::abs(roots[m] - target) < bestdist) {
        bestdist = std::abs(roots[m] - target);
        best = roots[m];
      }
    }
    ordered.emplace_back(best);
  }
  if (n % 2 == 1) ordered.emplace_back(-1.0);

  Configuration c{{{Complex(1.0)}, ordered}, Complex(0.0)};
  validate(c);
  return c;
}

// One point per level, alternating +1 / -1, no period.
inline Configuration build_alternating(int n_levels) {
  if (n_levels < 2 || n_levels % 2 != 0) {
    throw std::invalid_argument("build_alternating: need even count >= 2");
  }
  Configuration c;
  c.period = 0.0;
  for (int k = 0; k < n_levels; ++k) {
    c.levels.push_back({k % 2 == 0 ? Complex(1.0) : Complex(-1.0)});
  }
  validate(c);
  return c;
}

// Two-level chain with counts (2, 3), all points real, balanced in closed
// form by nested radicals.
inline Configuration build_wei23() {
  const double s5 = std::sqrt(5.0);
  const double a1 = 4.0 + 2.0 * s5 + std::sqrt(35.0 + 16.0 * s5);
  const double a2 = 0.5 * (-17.0 - 9.0 * s5 - std::sqrt(690.0 + 306.0 * s5));
  Configuration c{{{a1, 1.0 / a1}, {a2, -1.0, 1.0 / a2}}, Complex(0.0)};
  validate(c);
  return c;
}

// Concatenates two balanced chains whose first levels are the single point 1
// and whose upward force parts there agree (and do not vanish).  The second
// chain is appended multiplied by exp(T of the first); the result has period
// T + T'.  The combined residual is re-measured and must not exceed the
// inputs' residuals plus the measured force-part gap.
inline Configuration combine(const Configuration& c1, const Configuration& c2,
                             double check_tol = 1e-9) {
  if (count_at(c1, 0) != 1 || count_at(c2, 0) != 1) {
    throw HypothesisViolation(
        "combine: both first levels must hold exactly one point");
  }
  if (std::abs(c1.levels[0][0] - 1.0) > check_tol ||
      std::abs(c2.levels[0][0] - 1.0) > check_tol) {
    throw HypothesisViolation("combine: both first points must equal 1");
  }
  const Complex fp1 = force_plus(c1, 0, 0);
  const Complex fp2 = force_plus(c2, 0, 0);
  const double gap = std::abs(fp1 - fp2);
  if (gap > check_tol) {
    throw HypothesisViolation(
        "combine: upward force parts at the first points differ by " +
        std::to_string(gap));
  }
  if (std::abs(fp1) <= check_tol) {
    throw HypothesisViolation(
        "combine: upward force part at the first point vanishes");
  }

  const Complex shift = std::exp(c1.period);
  Configuration out;
  out.period = c1.period + c2.period;
  out.levels = c1.levels;
  for (const auto& lv : c2.levels) {
    std::vector<Complex> shifted;
    for (const Complex& p : lv) shifted.push_back(p * shift);
    out.levels.push_back(std::move(shifted));
  }
  validate(out);

  const double r1 = force_report(c1).residual_norm;
  const double r2 = force_report(c2).residual_norm;
  const double rout = force_report(out).residual_norm;
  if (rout > r1 + r2 + gap + 1e-12) {
    throw HypothesisViolation(
        "combine: result residual " + std::to_string(rout) +
        " exceeds the input residuals; inputs are not balanced");
  }
  return out;
}

}  // namespace dpms
