#pragma once

// Balance forces on a configuration.
//
// Write s for the exponent of level k and e(x) = x^s.  The force on point i
// of level k splits into three parts:
//
//   mutual  = sum_{j != i} (p_ki + p_kj) / (n_k^2 (p_ki - p_kj))
//   plus    =  s * sum_j e(p_{k+1,j}) / (n_k n_{k+1} (e(p_{k+1,j}) - e(p_ki)))
//   minus   = -s * sum_j e(p_ki)       / (n_k n_{k-1} (e(p_ki) - e(p_{k-1,j})))
//
// Neighbor levels wrap through exp(+-T).  Every term is a ratio of points,
// so the force is invariant under scaling the whole configuration, and the
// sum of all forces over one period vanishes identically (the cross terms
// telescope level by level with alternating sign, and N is even).

#include <cmath>
#include <complex>
#include <vector>

#include "dpms/configuration.hpp"
#include "dpms/errors.hpp"

namespace dpms {

namespace detail {

inline Complex level_power(Complex x, int s) {
  return s == 1 ? x : Complex(1.0, 0.0) / x;
}

}  // namespace detail

inline Complex force_mutual(const Configuration& c, int k, int i) {
  const auto& lv = c.levels[static_cast<size_t>(k)];
  const double nk = static_cast<double>(lv.size());
  const Complex p = lv[static_cast<size_t>(i)];
  Complex acc = 0.0;
  for (size_t j = 0; j < lv.size(); ++j) {
    if (static_cast<int>(j) == i) continue;
    acc += (p + lv[j]) / (nk * nk * (p - lv[j]));
  }
  return acc;
}

inline Complex force_plus(const Configuration& c, int k, int i) {
  const int s = level_exponent(k);
  const double nk = count_at(c, k);
  const double nu = count_at(c, k + 1);
  const Complex u = detail::level_power(point_at(c, k, i), s);
  Complex acc = 0.0;
  for (int j = 0; j < count_at(c, k + 1); ++j) {
    const Complex v = detail::level_power(point_at(c, k + 1, j), s);
    acc += v / (nk * nu * (v - u));
  }
  return static_cast<double>(s) * acc;
}

inline Complex force_minus(const Configuration& c, int k, int i) {
  const int s = level_exponent(k);
  const double nk = count_at(c, k);
  const double nl = count_at(c, k - 1);
  const Complex u = detail::level_power(point_at(c, k, i), s);
  Complex acc = 0.0;
  for (int j = 0; j < count_at(c, k - 1); ++j) {
    const Complex w = detail::level_power(point_at(c, k - 1, j), s);
    acc += u / (nk * nl * (u - w));
  }
  return -static_cast<double>(s) * acc;
}

inline Complex force(const Configuration& c, int k, int i) {
  const Complex f =
      force_mutual(c, k, i) + force_plus(c, k, i) + force_minus(c, k, i);
  if (!std::isfinite(f.real()) || !std::isfinite(f.imag())) {
    throw DegenerateConfiguration("force [" + std::to_string(k) + "][" +
                                  std::to_string(i) + "] is not finite");
  }
  return f;
}

struct ForceReport {
  std::vector<std::vector<Complex>> force;
  std::vector<std::vector<Complex>> plus;
  std::vector<std::vector<Complex>> minus;
  Complex total;
  double residual_norm;  // max_i |force_i|
};

inline ForceReport force_report(const Configuration& c) {
  ForceReport r;
  r.total = 0.0;
  r.residual_norm = 0.0;
  const int n = level_count(c);
  r.force.resize(static_cast<size_t>(n));
  r.plus.resize(static_cast<size_t>(n));
  r.minus.resize(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    const int nk = count_at(c, k);
    for (int i = 0; i < nk; ++i) {
      const Complex fp = force_plus(c, k, i);
      const Complex fm = force_minus(c, k, i);
      const Complex f = force_mutual(c, k, i) + fp + fm;
      if (!std::isfinite(f.real()) || !std::isfinite(f.imag())) {
        throw DegenerateConfiguration("force [" + std::to_string(k) + "][" +
                                      std::to_string(i) + "] is not finite");
      }
      r.force[static_cast<size_t>(k)].push_back(f);
      r.plus[static_cast<size_t>(k)].push_back(fp);
      r.minus[static_cast<size_t>(k)].push_back(fm);
      r.total += f;
      r.residual_norm = std::max(r.residual_norm, std::abs(f));
    }
  }
  return r;
}

}  // namespace dpms
