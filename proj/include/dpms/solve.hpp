#pragma once

// Damped Newton iteration for the balance equations.  Scale invariance makes
// the system rank deficient by one, so the first point is frozen (gauge) and
// each step solves the m x (m-1) linearization in the least-squares sense.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "dpms/configuration.hpp"
#include "dpms/errors.hpp"
#include "dpms/forces.hpp"
#include "dpms/jacobian.hpp"

namespace dpms {

struct SolveOutcome {
  Configuration config;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
  std::string message;
};

namespace detail {

inline double residual_norm_or_inf(const Configuration& c) {
  try {
    return force_report(c).residual_norm;
  } catch (const DegenerateConfiguration&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace detail

// Newton with step halving on the max-norm residual.  The point [0][0] stays
// frozen at its initial value; every solution in the scale orbit is reachable
// by choosing that value.  Returns the best iterate found; converged means
// residual <= tol.  A degenerate trial step counts as a rejected step.
inline SolveOutcome solve_balance(const Configuration& init, double tol = 1e-12,
                                  int max_iter = 50) {
  validate(init);
  SolveOutcome out;
  out.config = init;
  out.residual = force_report(init).residual_norm;

  const auto idx = point_index(init);
  const int m = static_cast<int>(idx.size());

  Configuration cur = init;
  double cur_res = out.residual;
  for (int iter = 0; iter < max_iter; ++iter) {
    if (cur_res <= tol) break;

    Eigen::VectorXcd fvec(m);
    const auto rep = force_report(cur);
    for (int row = 0; row < m; ++row) {
      const auto [k, i] = idx[static_cast<size_t>(row)];
      fvec(row) = rep.force[static_cast<size_t>(k)][static_cast<size_t>(i)];
    }
    const Eigen::MatrixXcd jac = force_jacobian(cur);
    Eigen::MatrixXcd reduced(m, m - 1);
    // Column 0 corresponds to the frozen point [0][0].
    reduced = jac.rightCols(m - 1);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(
        reduced, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXcd step = svd.solve(-fvec);

    bool accepted = false;
    double alpha = 1.0;
    for (int halving = 0; halving < 30; ++halving) {
      Configuration trial = cur;
      for (int col = 1; col < m; ++col) {
        const auto [k, i] = idx[static_cast<size_t>(col)];
        trial.levels[static_cast<size_t>(k)][static_cast<size_t>(i)] +=
            alpha * step(col - 1);
      }
      bool domain_ok = true;
      try {
        validate(trial);
      } catch (const DegenerateConfiguration&) {
        domain_ok = false;
      }
      const double trial_res =
          domain_ok ? detail::residual_norm_or_inf(trial)
                    : std::numeric_limits<double>::infinity();
      if (trial_res < cur_res) {
        cur = trial;
        cur_res = trial_res;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      out.message = "line search stalled";
      break;
    }
    out.iterations = iter + 1;
  }

  out.config = cur;
  out.residual = cur_res;
  out.converged = cur_res <= tol;
  if (out.converged) out.message = "converged";
  else if (out.message.empty()) out.message = "iteration limit reached";
  return out;
}

// Divides out the gauge: scales so the first point becomes exactly 1.
inline Configuration canonicalize(const Configuration& c) {
  return scale(c, 1.0 / c.levels[0][0]);
}

// Detects iterates that drifted to the boundary of the domain: some point is
// smaller than tol times the largest point, i.e. numerically at the puncture
// at 0.  Along such families the residual can reach machine zero while the
// limit is not a valid configuration (the collapsing points leave C*), so a
// converged outcome with this flag set is a degeneration, not a solution with
// distinct points.
inline bool is_puncture_collapse(const Configuration& c, double tol = 1e-8) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& lv : c.levels) {
    for (const auto& p : lv) {
      lo = std::min(lo, std::abs(p));
      hi = std::max(hi, std::abs(p));
    }
  }
  return lo <= tol * hi;
}

// Detects, for a two-level chain with two points per level, whether the
// configuration lies in the scale orbit of {1, -1} / {i, -i}.
inline bool is_fourth_roots_class(const Configuration& c, double tol = 1e-8) {
  if (level_count(c) != 2 || count_at(c, 0) != 2 || count_at(c, 1) != 2) {
    return false;
  }
  const Configuration n = canonicalize(c);
  if (std::abs(n.levels[0][1] + 1.0) > tol) return false;
  const Complex a = n.levels[1][0];
  const Complex b = n.levels[1][1];
  const Complex i1(0.0, 1.0);
  return (std::abs(a - i1) <= tol && std::abs(b + i1) <= tol) ||
         (std::abs(a + i1) <= tol && std::abs(b - i1) <= tol);
}

}  // namespace dpms
