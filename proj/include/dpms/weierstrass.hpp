#pragma once

// Degenerate-limit Weierstrass data attached to a configuration.
//
// Each level k carries a rational function and a 1-form coefficient
//
//   G_k(z)   = delta_k z (sum_i alpha_{k,i}/(z - a_{k,i})
//                       - sum_i beta_{k,i}/(z - b_{k,i}))
//   eta_k(z) = sum_i gamma_{k,i}/(z - a_{k,i})
//            - sum_i gamma_{k-1,i}/(z - b_{k,i})
//
// with per-level weight sums equal to 1, so G_k vanishes at 0 and infinity
// and eta_k decays like 1/z^2.  The vector built by x_from_config places the
// poles at parity-twisted images of the configuration points; at that vector
// eta_k is proportional to G_k/(delta_k z) pointwise.
//
// The five verification components measure, in closed form at the degenerate
// limit: eta at the zeros of G (f1), equality of the gamma weights (f2),
// matching of the log-periods across the seams modulo 2 pi i (f3), the
// residue combination that reproduces the balance forces (f4), and the
// normalized flux 2 pi i / delta_k (f5).  A trapezoid contour oracle
// cross-checks every residue independently of the partial-fraction algebra.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "dpms/configuration.hpp"
#include "dpms/errors.hpp"
#include "dpms/forces.hpp"
#include "dpms/polynomial.hpp"

namespace dpms {

struct ParameterVector {
  // Index [k][i]; alphas, gammas and a have n_k entries at level k, betas and
  // b have n_{k-1} entries (the b poles descend from the level below).
  std::vector<std::vector<double>> alphas;
  std::vector<std::vector<double>> betas;
  std::vector<std::vector<double>> gammas;
  std::vector<double> deltas;
  std::vector<std::vector<Complex>> a;
  std::vector<std::vector<Complex>> b;
  double t = 0.0;  // gluing parameter, r = exp(-1/t^2), r = 0 at t = 0
};

namespace detail {

inline int canonical_level(int k, int n) { return ((k % n) + n) % n; }

// Conjugation parity: levels with exponent -1 (even stored index) carry a
// conjugation in the pole maps and in the seam comparisons.
inline Complex level_conj(int k, Complex z) {
  return level_exponent(k) == -1 ? std::conj(z) : z;
}

inline Complex pole_map(int k, Complex p) {
  const Complex q = level_conj(k, p);
  return level_exponent(k) == -1 ? Complex(1.0, 0.0) / q : q;
}

}  // namespace detail

inline int level_count(const ParameterVector& x) {
  return static_cast<int>(x.a.size());
}

// Builds the degenerate-limit parameter vector of a configuration: uniform
// weights 1/n_k, unit deltas, poles a_{k,i} and b_{k,i} the parity-twisted
// images of the level-k and level-(k-1) points.  All poles of a level are
// pairwise distinct whenever the configuration is valid.
inline ParameterVector x_from_config(const Configuration& c) {
  validate(c);
  const int n = level_count(c);
  ParameterVector x;
  x.alphas.resize(static_cast<size_t>(n));
  x.betas.resize(static_cast<size_t>(n));
  x.gammas.resize(static_cast<size_t>(n));
  x.deltas.assign(static_cast<size_t>(n), 1.0);
  x.a.resize(static_cast<size_t>(n));
  x.b.resize(static_cast<size_t>(n));
  x.t = 0.0;
  for (int k = 0; k < n; ++k) {
    const int nk = count_at(c, k);
    const int np = count_at(c, k - 1);
    x.alphas[static_cast<size_t>(k)].assign(static_cast<size_t>(nk), 1.0 / nk);
    x.gammas[static_cast<size_t>(k)].assign(static_cast<size_t>(nk), 1.0 / nk);
    x.betas[static_cast<size_t>(k)].assign(static_cast<size_t>(np), 1.0 / np);
    for (int i = 0; i < nk; ++i) {
      x.a[static_cast<size_t>(k)].push_back(
          detail::pole_map(k, point_at(c, k, i)));
    }
    for (int i = 0; i < np; ++i) {
      x.b[static_cast<size_t>(k)].push_back(
          detail::pole_map(k, point_at(c, k - 1, i)));
    }
  }
  // Distinct-pole invariant, inherited from the configuration separation.
  for (int k = 0; k < n; ++k) {
    std::vector<Complex> all = x.a[static_cast<size_t>(k)];
    all.insert(all.end(), x.b[static_cast<size_t>(k)].begin(),
               x.b[static_cast<size_t>(k)].end());
    for (size_t i = 0; i < all.size(); ++i) {
      if (!(std::abs(all[i]) > 1e-150)) {
        throw DegenerateConfiguration("pole at level " + std::to_string(k) +
                                      " is zero");
      }
      for (size_t j = i + 1; j < all.size(); ++j) {
        if (std::abs(all[i] - all[j]) <=
            1e-12 * std::max(std::abs(all[i]), std::abs(all[j]))) {
          throw DegenerateConfiguration("coincident poles at level " +
                                        std::to_string(k));
        }
      }
    }
  }
  return x;
}

namespace detail {

// G_k(z)/(delta_k z), the rational part shared by G and the zero finder.
inline Complex gk_rational(const ParameterVector& x, int k, Complex z) {
  const size_t kk = static_cast<size_t>(canonical_level(k, level_count(x)));
  Complex acc = 0.0;
  for (size_t i = 0; i < x.a[kk].size(); ++i)
    acc += x.alphas[kk][i] / (z - x.a[kk][i]);
  for (size_t i = 0; i < x.b[kk].size(); ++i)
    acc -= x.betas[kk][i] / (z - x.b[kk][i]);
  return acc;
}

inline Complex gk_rational_derivative(const ParameterVector& x, int k,
                                      Complex z) {
  const size_t kk = static_cast<size_t>(canonical_level(k, level_count(x)));
  Complex acc = 0.0;
  for (size_t i = 0; i < x.a[kk].size(); ++i) {
    const Complex d = z - x.a[kk][i];
    acc -= x.alphas[kk][i] / (d * d);
  }
  for (size_t i = 0; i < x.b[kk].size(); ++i) {
    const Complex d = z - x.b[kk][i];
    acc += x.betas[kk][i] / (d * d);
  }
  return acc;
}

}  // namespace detail

// Value of G_k at z.  Throws when z sits on a pole.
inline Complex gauss_component(const ParameterVector& x, int k, Complex z) {
  const int kk = detail::canonical_level(k, level_count(x));
  const Complex v = x.deltas[static_cast<size_t>(kk)] * z *
                    detail::gk_rational(x, kk, z);
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
    throw NumericalFailure("gauss component evaluated at a pole");
  }
  return v;
}

// Coefficient of dz of eta_k at z.  Throws when z sits on a pole.
inline Complex eta_component(const ParameterVector& x, int k, Complex z) {
  const int n = level_count(x);
  const size_t kk = static_cast<size_t>(detail::canonical_level(k, n));
  const size_t kp = static_cast<size_t>(detail::canonical_level(k - 1, n));
  Complex acc = 0.0;
  for (size_t i = 0; i < x.a[kk].size(); ++i)
    acc += x.gammas[kk][i] / (z - x.a[kk][i]);
  for (size_t i = 0; i < x.b[kk].size(); ++i)
    acc -= x.gammas[kp][i] / (z - x.b[kk][i]);
  if (!std::isfinite(acc.real()) || !std::isfinite(acc.imag())) {
    throw NumericalFailure("eta component evaluated at a pole");
  }
  return acc;
}

// Finite nonzero zeros of G_k.  Clears denominators; the top coefficient
// cancels because the alpha and beta weights both sum to 1, leaving degree
// n_k + n_{k-1} - 2.  Errors when a further leading cancellation drops the
// degree (a zero escaped to infinity) or when two zeros coincide.
inline std::vector<Complex> gk_zeros(const ParameterVector& x, int k) {
  const size_t kk =
      static_cast<size_t>(detail::canonical_level(k, level_count(x)));
  std::vector<Complex> poles = x.a[kk];
  poles.insert(poles.end(), x.b[kk].begin(), x.b[kk].end());
  std::vector<double> weights(x.alphas[kk].begin(), x.alphas[kk].end());
  for (double bw : x.betas[kk]) weights.push_back(-bw);

  const size_t np = poles.size();
  std::vector<Complex> numerator(np, 0.0);  // degree np-1 coefficient slots
  for (size_t i = 0; i < np; ++i) {
    std::vector<Complex> term{1.0};
    for (size_t j = 0; j < np; ++j) {
      if (j == i) continue;
      term = poly_multiply(term, {-poles[j], 1.0});
    }
    for (size_t d = 0; d < term.size(); ++d) numerator[d] += weights[i] * term[d];
  }

  double coeff_scale = 0.0;
  for (const Complex& cc : numerator)
    coeff_scale = std::max(coeff_scale, std::abs(cc));
  if (coeff_scale == 0.0) return {};

  // Top slot must cancel (weight sums are equal); anything bigger means the
  // parameter vector violates the weight normalization.
  if (std::abs(numerator.back()) > 1e-8 * coeff_scale) {
    throw NumericalFailure("weight sums differ, zero count undefined");
  }
  numerator.pop_back();
  if (numerator.empty()) return {};
  if (numerator.size() == 1 ||
      std::abs(numerator.back()) <= 1e-9 * coeff_scale) {
    if (numerator.size() == 1) return {};
    throw NumericalFailure(
        "leading zero coefficient vanished at level " + std::to_string(kk) +
        ", a zero degenerated to infinity");
  }

  std::vector<Complex> roots = poly_roots(numerator);
  double pole_scale = 0.0;
  for (const Complex& p : poles) pole_scale = std::max(pole_scale, std::abs(p));
  for (Complex& z : roots) {
    for (int it = 0; it < 16; ++it) {
      const Complex g = detail::gk_rational(x, static_cast<int>(kk), z);
      const Complex dg = detail::gk_rational_derivative(x, static_cast<int>(kk), z);
      if (!(std::abs(dg) > 0.0)) break;
      const Complex step = g / dg;
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
      z -= step;
      if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(z))) break;
    }
  }
  std::vector<Complex> out;
  for (const Complex& z : roots) {
    if (std::abs(z) <= 1e-12 * pole_scale) continue;  // zero of the z factor
    out.push_back(z);
  }
  for (size_t i = 0; i < out.size(); ++i) {
    for (size_t j = i + 1; j < out.size(); ++j) {
      if (std::abs(out[i] - out[j]) <=
          1e-8 * std::max(1.0, std::max(std::abs(out[i]), std::abs(out[j])))) {
        throw NumericalFailure("multiple zero at level " + std::to_string(kk));
      }
    }
  }
  std::sort(out.begin(), out.end(), [](Complex lhs, Complex rhs) {
    const double ml = std::abs(lhs), mr = std::abs(rhs);
    if (ml != mr) return ml < mr;
    return std::arg(lhs) < std::arg(rhs);
  });
  return out;
}

// Residue of G_k eta_k at the double pole a_{k,i}: with S the a-part of
// G/(delta z) and R the a-part of eta, both with the i-th term removed,
//   res = delta_k (alpha_i gamma_i + a_i (alpha_i R(a_i) + gamma_i S(a_i))).
inline Complex residue_a_closed(const ParameterVector& x, int k, int i) {
  const int n = level_count(x);
  const size_t kk = static_cast<size_t>(detail::canonical_level(k, n));
  const size_t kp = static_cast<size_t>(detail::canonical_level(k - 1, n));
  const size_t ii = static_cast<size_t>(i);
  const Complex ai = x.a[kk][ii];
  Complex s = 0.0, r = 0.0;
  for (size_t j = 0; j < x.a[kk].size(); ++j) {
    if (j == ii) continue;
    const Complex d = ai - x.a[kk][j];
    s += x.alphas[kk][j] / d;
    r += x.gammas[kk][j] / d;
  }
  for (size_t j = 0; j < x.b[kk].size(); ++j) {
    const Complex d = ai - x.b[kk][j];
    s -= x.betas[kk][j] / d;
    r -= x.gammas[kp][j] / d;
  }
  const double alpha = x.alphas[kk][ii];
  const double gamma = x.gammas[kk][ii];
  return x.deltas[kk] * (alpha * gamma + ai * (alpha * r + gamma * s));
}

// Residue of G_k eta_k at the double pole b_{k,i}, same structure with the
// signs of the b-weights.
inline Complex residue_b_closed(const ParameterVector& x, int k, int i) {
  const int n = level_count(x);
  const size_t kk = static_cast<size_t>(detail::canonical_level(k, n));
  const size_t kp = static_cast<size_t>(detail::canonical_level(k - 1, n));
  const size_t ii = static_cast<size_t>(i);
  const Complex bi = x.b[kk][ii];
  Complex s = 0.0, r = 0.0;
  for (size_t j = 0; j < x.a[kk].size(); ++j) {
    const Complex d = bi - x.a[kk][j];
    s += x.alphas[kk][j] / d;
    r += x.gammas[kk][j] / d;
  }
  for (size_t j = 0; j < x.b[kk].size(); ++j) {
    if (j == ii) continue;
    const Complex d = bi - x.b[kk][j];
    s -= x.betas[kk][j] / d;
    r -= x.gammas[kp][j] / d;
  }
  const double beta = x.betas[kk][ii];
  const double gamma = x.gammas[kp][ii];
  return x.deltas[kk] * (beta * gamma + bi * (-beta * r - gamma * s));
}

enum class PoleSide { a, b };

// Trapezoid contour quadrature of (1/2 pi i) times the integral of
// G_k eta_k around one pole.  The circle radius is a quarter of the distance
// to the nearest other pole and to the origin; spectral accuracy in the node
// count.  Independent of the partial-fraction residue algebra.
inline Complex residue_oracle(const ParameterVector& x, int k, int i,
                              PoleSide side, int nodes = 512) {
  const size_t kk =
      static_cast<size_t>(detail::canonical_level(k, level_count(x)));
  const size_t ii = static_cast<size_t>(i);
  const Complex center = side == PoleSide::a ? x.a[kk][ii] : x.b[kk][ii];
  double dist = std::abs(center);
  for (size_t j = 0; j < x.a[kk].size(); ++j) {
    if (side == PoleSide::a && j == ii) continue;
    dist = std::min(dist, std::abs(center - x.a[kk][j]));
  }
  for (size_t j = 0; j < x.b[kk].size(); ++j) {
    if (side == PoleSide::b && j == ii) continue;
    dist = std::min(dist, std::abs(center - x.b[kk][j]));
  }
  const double rho = 0.25 * dist;
  if (rho < 1e-10) {
    throw NumericalFailure("contour radius collapsed, poles too close");
  }
  Complex acc = 0.0;
  const double step = 2.0 * 3.14159265358979323846 / nodes;
  for (int j = 0; j < nodes; ++j) {
    const Complex dir = std::polar(1.0, step * j);
    const Complex z = center + rho * dir;
    acc += gauss_component(x, static_cast<int>(kk), z) *
           eta_component(x, static_cast<int>(kk), z) * dir;
  }
  return acc * (rho / static_cast<double>(nodes));
}

// Same quadrature for the residue of eta_k / G_k at the origin; the radius
// additionally stays a quarter away from the zeros of G_k, which are poles
// of the integrand.
inline Complex origin_residue_oracle(const ParameterVector& x, int k,
                                     int nodes = 512) {
  const size_t kk =
      static_cast<size_t>(detail::canonical_level(k, level_count(x)));
  double dist = std::numeric_limits<double>::infinity();
  for (const Complex& p : x.a[kk]) dist = std::min(dist, std::abs(p));
  for (const Complex& p : x.b[kk]) dist = std::min(dist, std::abs(p));
  for (const Complex& z : gk_zeros(x, static_cast<int>(kk)))
    dist = std::min(dist, std::abs(z));
  const double rho = 0.25 * dist;
  if (rho < 1e-10) {
    throw NumericalFailure("contour radius collapsed at the origin");
  }
  Complex acc = 0.0;
  const double step = 2.0 * 3.14159265358979323846 / nodes;
  for (int j = 0; j < nodes; ++j) {
    const Complex dir = std::polar(1.0, step * j);
    const Complex z = rho * dir;
    acc += eta_component(x, static_cast<int>(kk), z) /
           gauss_component(x, static_cast<int>(kk), z) * dir;
  }
  return acc * (rho / static_cast<double>(nodes));
}

struct LimitVerification {
  ParameterVector x;
  // f1[k]: eta_k at each zero of G_k.  f2[k][i-1]: gamma_{k,i} - gamma_{k,1}.
  // f3[k][i-1]: seam log mismatch, principal representative modulo 2 pi i.
  // f4[k][i]: residue combination, equal to -4 pi i (-1)^k F_{k,i}.
  // f5[k]: normalized flux, target 2 pi i.
  std::vector<std::vector<Complex>> f1;
  std::vector<std::vector<double>> f2;
  std::vector<std::vector<Complex>> f3;
  std::vector<std::vector<Complex>> f4;
  std::vector<Complex> f5;
  std::vector<std::vector<Complex>> residues_a;
  std::vector<std::vector<Complex>> residues_b;
  std::vector<std::vector<Complex>> oracle_a;
  std::vector<std::vector<Complex>> oracle_b;
  double max_f1 = 0.0;
  double max_f2 = 0.0;
  double max_f3 = 0.0;
  double max_f4 = 0.0;
  double max_f5 = 0.0;  // deviation from 2 pi i
  double oracle_deviation = 0.0;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

namespace detail {

inline Complex mod_two_pi_i(Complex z) {
  const double two_pi = 2.0 * 3.14159265358979323846;
  return {z.real(), z.imag() - two_pi * std::round(z.imag() / two_pi)};
}

}  // namespace detail

// Evaluates the five verification components and the residue oracle on a
// parameter vector.  pass means every component stays within tol; the oracle
// deviation is reported separately.
inline LimitVerification verify_parameters(const ParameterVector& x,
                                           double tol = 1e-8,
                                           int oracle_nodes = 512) {
  const int n = level_count(x);
  const Complex two_pi_i(0.0, 2.0 * 3.14159265358979323846);
  LimitVerification v;
  v.x = x;
  v.tolerance = tol;
  v.f1.resize(static_cast<size_t>(n));
  v.f2.resize(static_cast<size_t>(n));
  v.f3.resize(static_cast<size_t>(n));
  v.f4.resize(static_cast<size_t>(n));
  v.f5.resize(static_cast<size_t>(n));
  v.residues_a.resize(static_cast<size_t>(n));
  v.residues_b.resize(static_cast<size_t>(n));
  v.oracle_a.resize(static_cast<size_t>(n));
  v.oracle_b.resize(static_cast<size_t>(n));

  for (int k = 0; k < n; ++k) {
    const size_t kk = static_cast<size_t>(k);
    for (const Complex& zero : gk_zeros(x, k)) {
      const Complex val = eta_component(x, k, zero);
      v.f1[kk].push_back(val);
      v.max_f1 = std::max(v.max_f1, std::abs(val));
    }
    for (size_t i = 1; i < x.gammas[kk].size(); ++i) {
      const double d = x.gammas[kk][i] - x.gammas[kk][0];
      v.f2[kk].push_back(d);
      v.max_f2 = std::max(v.max_f2, std::abs(d));
    }
    for (size_t i = 0; i < x.a[kk].size(); ++i) {
      const Complex ra = residue_a_closed(x, k, static_cast<int>(i));
      const Complex oa =
          residue_oracle(x, k, static_cast<int>(i), PoleSide::a, oracle_nodes);
      v.residues_a[kk].push_back(ra);
      v.oracle_a[kk].push_back(oa);
      v.oracle_deviation = std::max(v.oracle_deviation, std::abs(ra - oa));
    }
    for (size_t i = 0; i < x.b[kk].size(); ++i) {
      const Complex rb = residue_b_closed(x, k, static_cast<int>(i));
      const Complex ob =
          residue_oracle(x, k, static_cast<int>(i), PoleSide::b, oracle_nodes);
      v.residues_b[kk].push_back(rb);
      v.oracle_b[kk].push_back(ob);
      v.oracle_deviation = std::max(v.oracle_deviation, std::abs(rb - ob));
    }
  }

  for (int k = 0; k < n; ++k) {
    const size_t kk = static_cast<size_t>(k);
    const size_t ku = static_cast<size_t>(detail::canonical_level(k + 1, n));
    const double sk = level_exponent(k);
    // Seam log comparison pairs level-k a poles with level-(k+1) b poles,
    // both descending from the level-k points.
    const double dk = x.deltas[kk];
    const double du = x.deltas[ku];
    for (size_t i = 1; i < x.a[kk].size(); ++i) {
      const Complex la = std::log(x.a[kk][i] / x.a[kk][0]) / dk;
      const Complex lb = std::log(x.b[ku][i] / x.b[ku][0]) / du;
      const Complex val = sk * detail::level_conj(k, la) +
                          sk * detail::level_conj(k + 1, lb);
      const Complex red = detail::mod_two_pi_i(val);
      v.f3[kk].push_back(red);
      v.max_f3 = std::max(v.max_f3, std::abs(red));
    }
    for (size_t i = 0; i < x.a[kk].size(); ++i) {
      const Complex rb = v.residues_b[ku][i];
      const Complex ra = v.residues_a[kk][i];
      const Complex val = two_pi_i * (detail::level_conj(k + 1, rb) -
                                      detail::level_conj(k, ra));
      v.f4[kk].push_back(val);
      v.max_f4 = std::max(v.max_f4, std::abs(val));
    }
    const Complex g0 = detail::gk_rational(x, k, 0.0);
    const Complex e0 = eta_component(x, k, 0.0);
    // Ratio first: at a freshly built limit vector e0 and g0 are the same
    // sum, so the quotient is exact and the flux keeps the 2 pi i bits.
    const Complex f5 = two_pi_i * (e0 / (x.deltas[kk] * g0));
    v.f5[kk] = f5;
    v.max_f5 = std::max(v.max_f5, std::abs(f5 - two_pi_i));
    const Complex o5 = two_pi_i * origin_residue_oracle(x, k, oracle_nodes);
    v.oracle_deviation = std::max(v.oracle_deviation, std::abs(f5 - o5));
  }

  v.max_deviation = std::max({v.max_f1, v.max_f2, v.max_f3, v.max_f4, v.max_f5});
  v.pass = v.max_deviation <= tol;
  return v;
}

// Builds the degenerate-limit vector of the configuration and verifies it.
// For a balanced configuration every component vanishes; f4 reproduces the
// balance forces for unbalanced ones.
inline LimitVerification limit_F(const Configuration& c, double tol = 1e-8,
                                 int oracle_nodes = 512) {
  return verify_parameters(x_from_config(c), tol, oracle_nodes);
}

}  // namespace dpms
