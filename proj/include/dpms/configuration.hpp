#pragma once

// Periodic point configurations on a chain of punctured planes.
//
// A Configuration holds N levels (N even), level k carrying n_k >= 1 nonzero
// complex points.  The chain repeats with multiplicative period exp(T):
// level k+N holds the points of level k times exp(T).  Levels are stored
// 0-based.  Points on even-stored levels enter the balance equations through
// their reciprocals (exponent -1), odd-stored levels directly (exponent +1);
// the exponent alternates along the chain, which is why N must be even.

#include <cmath>
#include <complex>
#include <cstdlib>
#include <string>
#include <vector>

#include "dpms/errors.hpp"

namespace dpms {

using Complex = std::complex<double>;

struct Configuration {
  std::vector<std::vector<Complex>> levels;
  Complex period;  // T
};

constexpr double kDefaultSeparationTol = 1e-12;

// Exponent applied to the points of stored level k inside the balance
// equations.  Any integer k is accepted; the pattern is 2-periodic.
inline int level_exponent(long k) {
  return ((k % 2) + 2) % 2 == 0 ? -1 : +1;
}

inline int level_count(const Configuration& c) {
  return static_cast<int>(c.levels.size());
}

// n_k for any integer k, wrapping periodically.
inline int count_at(const Configuration& c, long k) {
  const long n = level_count(c);
  const long m = ((k % n) + n) % n;
  return static_cast<int>(c.levels[static_cast<size_t>(m)].size());
}

// p_{k,i} for any integer level k: the canonical point times exp(T)^w where
// w counts how many times k wraps around the chain.
inline Complex point_at(const Configuration& c, long k, int i) {
  const long n = level_count(c);
  long w = k / n;
  long m = k % n;
  if (m < 0) {
    m += n;
    w -= 1;
  }
  const Complex p = c.levels[static_cast<size_t>(m)][static_cast<size_t>(i)];
  return w == 0 ? p : p * std::exp(c.period * static_cast<double>(w));
}

// Checks the domain assumptions: N even and positive, every level nonempty,
// all points nonzero, points within a level pairwise distinct, and points on
// adjacent levels (including the wrap through exp(T)) pairwise distinct.
// Distinctness is relative: |p - q| <= tol * max(|p|, |q|) counts as a
// collision.  Throws DegenerateConfiguration.
inline void validate(const Configuration& c,
                     double separation_tol = kDefaultSeparationTol) {
  const int n = level_count(c);
  if (n == 0 || n % 2 != 0) {
    throw DegenerateConfiguration("level count must be positive and even, got " +
                                  std::to_string(n));
  }
  auto collide = [separation_tol](Complex a, Complex b) {
    return std::abs(a - b) <=
           separation_tol * std::max(std::abs(a), std::abs(b));
  };
  for (int k = 0; k < n; ++k) {
    const auto& lv = c.levels[static_cast<size_t>(k)];
    if (lv.empty()) {
      throw DegenerateConfiguration("level " + std::to_string(k) +
                                    " has no points");
    }
    for (size_t i = 0; i < lv.size(); ++i) {
      if (!(std::abs(lv[i]) > 1e-150) || !std::isfinite(std::abs(lv[i]))) {
        throw DegenerateConfiguration("point [" + std::to_string(k) + "][" +
                                      std::to_string(i) +
                                      "] is zero or not finite");
      }
      for (size_t j = i + 1; j < lv.size(); ++j) {
        if (collide(lv[i], lv[j])) {
          throw DegenerateConfiguration(
              "points [" + std::to_string(k) + "][" + std::to_string(i) +
              "] and [" + std::to_string(k) + "][" + std::to_string(j) +
              "] coincide");
        }
      }
    }
    // Adjacent-level collisions make the cross terms singular.  For k = n-1
    // the upper neighbor is level 0 shifted by exp(T).
    for (size_t i = 0; i < lv.size(); ++i) {
      for (int j = 0; j < count_at(c, k + 1); ++j) {
        if (collide(lv[i], point_at(c, k + 1, j))) {
          throw DegenerateConfiguration(
              "point [" + std::to_string(k) + "][" + std::to_string(i) +
              "] collides with upper neighbor level point " +
              std::to_string(j));
        }
      }
    }
  }
}

// Genus of the surface obtained by opening all nodes of one period.
inline int genus(const Configuration& c) {
  int g = 1;
  for (const auto& lv : c.levels) g += static_cast<int>(lv.size()) - 1;
  return g;
}

// Multiplies every point by lambda.  The balance forces are invariant under
// this map.
inline Configuration scale(const Configuration& c, Complex lambda) {
  Configuration out = c;
  for (auto& lv : out.levels)
    for (auto& p : lv) p *= lambda;
  return out;
}

}  // namespace dpms
