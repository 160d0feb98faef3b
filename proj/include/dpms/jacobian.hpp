#pragma once

// Derivatives of the balance forces with respect to the configuration
// points, flattened level-major into an m x m complex matrix.  Scale
// invariance gives J p = 0 identically and the vanishing total force gives
// 1^T J = 0, so the rank is at most m - 1; a configuration is called
// nondegenerate when that bound is attained.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <limits>
#include <utility>
#include <vector>

#include "dpms/configuration.hpp"
#include "dpms/forces.hpp"

namespace dpms {

// Flattened (level, index) pairs in row/column order.
inline std::vector<std::pair<int, int>> point_index(const Configuration& c) {
  std::vector<std::pair<int, int>> idx;
  for (int k = 0; k < level_count(c); ++k)
    for (int i = 0; i < count_at(c, k); ++i) idx.emplace_back(k, i);
  return idx;
}

inline Eigen::MatrixXcd force_jacobian(const Configuration& c) {
  const auto idx = point_index(c);
  const int m = static_cast<int>(idx.size());
  const int n = level_count(c);
  std::vector<int> offset(static_cast<size_t>(n) + 1, 0);
  for (int k = 0; k < n; ++k) offset[static_cast<size_t>(k) + 1] = offset[static_cast<size_t>(k)] + count_at(c, k);

  Eigen::MatrixXcd jac = Eigen::MatrixXcd::Zero(m, m);
  for (int row = 0; row < m; ++row) {
    const int k = idx[static_cast<size_t>(row)].first;
    const int i = idx[static_cast<size_t>(row)].second;
    const int s = level_exponent(k);
    const double sd = static_cast<double>(s);
    const auto& lv = c.levels[static_cast<size_t>(k)];
    const double nk = static_cast<double>(lv.size());
    const Complex p = lv[static_cast<size_t>(i)];

    // d e(x) / dx where e(x) = x^s.
    auto dpow = [s](Complex x) {
      return s == 1 ? Complex(1.0) : -1.0 / (x * x);
    };

    // Mutual term.
    for (size_t j = 0; j < lv.size(); ++j) {
      if (static_cast<int>(j) == i) continue;
      const Complex d = p - lv[j];
      jac(row, offset[static_cast<size_t>(k)] + i) += -2.0 * lv[j] / (nk * nk * d * d);
      jac(row, offset[static_cast<size_t>(k)] + static_cast<int>(j)) +=
          2.0 * p / (nk * nk * d * d);
    }

    const Complex u = detail::level_power(p, s);

    // Upward part.  For k = n-1 the neighbor is level 0 shifted by exp(T).
    {
      const int kc = (k + 1) % n;
      const double nu = static_cast<double>(count_at(c, k + 1));
      const Complex cf = (k + 1 == n) ? std::exp(c.period) : Complex(1.0);
      for (int j = 0; j < count_at(c, k + 1); ++j) {
        const Complex praw = point_at(c, k + 1, j);
        const Complex v = detail::level_power(praw, s);
        const Complex d = v - u;
        jac(row, offset[static_cast<size_t>(k)] + i) +=
            sd * v / (nk * nu * d * d) * dpow(p);
        jac(row, offset[static_cast<size_t>(kc)] + j) +=
            -sd * u / (nk * nu * d * d) * dpow(praw) * cf;
      }
    }

    // Downward part.  For k = 0 the neighbor is level n-1 shifted by exp(-T).
    {
      const int kc = (k - 1 + n) % n;
      const double nl = static_cast<double>(count_at(c, k - 1));
      const Complex cf = (k == 0) ? std::exp(-c.period) : Complex(1.0);
      for (int j = 0; j < count_at(c, k - 1); ++j) {
        const Complex praw = point_at(c, k - 1, j);
        const Complex w = detail::level_power(praw, s);
        const Complex d = u - w;
        jac(row, offset[static_cast<size_t>(k)] + i) +=
            sd * w / (nk * nl * d * d) * dpow(p);
        jac(row, offset[static_cast<size_t>(kc)] + j) +=
            -sd * u / (nk * nl * d * d) * dpow(praw) * cf;
      }
    }
  }
  return jac;
}

// Central-difference check of the analytic matrix; debugging aid.
inline Eigen::MatrixXcd force_jacobian_fd(const Configuration& c,
                                          double h = 1e-6) {
  const auto idx = point_index(c);
  const int m = static_cast<int>(idx.size());
  Eigen::MatrixXcd jac(m, m);
  for (int col = 0; col < m; ++col) {
    Configuration hi = c;
    Configuration lo = c;
    auto& phi = hi.levels[static_cast<size_t>(idx[static_cast<size_t>(col)].first)]
                         [static_cast<size_t>(idx[static_cast<size_t>(col)].second)];
    auto& plo = lo.levels[static_cast<size_t>(idx[static_cast<size_t>(col)].first)]
                         [static_cast<size_t>(idx[static_cast<size_t>(col)].second)];
    const double step = h * std::max(1.0, std::abs(phi));
    phi += step;
    plo -= step;
    for (int row = 0; row < m; ++row) {
      const auto [k, i] = idx[static_cast<size_t>(row)];
      jac(row, col) = (force(hi, k, i) - force(lo, k, i)) / (2.0 * step);
    }
  }
  return jac;
}

struct JacobianReport {
  Eigen::MatrixXcd matrix;
  Eigen::VectorXd singular_values;  // descending
  int m = 0;
  int rank = 0;
  bool nondegenerate = false;
  double tolerance = 0.0;
};

// Numerical rank of the force derivative: singular values above
// tol * sigma_max count.  Nondegenerate means rank == m - 1, the maximum
// permitted by scale invariance.
inline JacobianReport jacobian_report(const Configuration& c,
                                      double tol = 1e-8) {
  JacobianReport rep;
  rep.matrix = force_jacobian(c);
  rep.m = static_cast<int>(rep.matrix.rows());
  rep.tolerance = tol;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(rep.matrix);
  rep.singular_values = svd.singularValues();
  const double smax = rep.singular_values.size() > 0 ? rep.singular_values(0) : 0.0;
  rep.rank = 0;
  for (Eigen::Index i = 0; i < rep.singular_values.size(); ++i) {
    if (rep.singular_values(i) > tol * smax) ++rep.rank;
  }
  rep.nondegenerate = (rep.rank == rep.m - 1);
  return rep;
}

// Ratio separating the smallest counted singular value from the first
// discarded one; large when the rank decision is well conditioned.
inline double spectral_gap(const JacobianReport& rep) {
  if (rep.rank <= 0 ||
      static_cast<Eigen::Index>(rep.rank) >= rep.singular_values.size()) {
    return 0.0;
  }
  const double below = rep.singular_values(rep.rank);
  if (below == 0.0) return std::numeric_limits<double>::infinity();
  return rep.singular_values(rep.rank - 1) / below;
}

}  // namespace dpms
