#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "dpms/catalog.hpp"
#include "dpms/forces.hpp"

using dpms::Complex;

TEST_CASE("squared binomial coefficients, degree 8") {
  const std::vector<long long> expected{1, 64, 784, 3136, 4900,
                                        3136, 784, 64, 1};
  CHECK(dpms::hypergeom_coefficients(8) == expected);
}

TEST_CASE("coefficient tables are palindromic and positive") {
  for (int n = 1; n <= 30; ++n) {
    const auto c = dpms::hypergeom_coefficients(n);
    REQUIRE(c.size() == static_cast<size_t>(n) + 1);
    CHECK(c.front() == 1);
    for (size_t k = 0; k < c.size(); ++k) {
      CHECK(c[k] > 0);
      CHECK(c[k] == c[c.size() - 1 - k]);
    }
  }
}

TEST_CASE("degree bounds are enforced") {
  CHECK_THROWS_AS(dpms::hypergeom_coefficients(0), std::invalid_argument);
  CHECK_THROWS_AS(dpms::hypergeom_coefficients(31), std::invalid_argument);
}

TEST_CASE("differential identity vanishes everywhere") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  for (int n = 1; n <= 12; ++n) {
    for (int trial = 0; trial < 8; ++trial) {
      const Complex z(coord(rng), coord(rng));
      const double scale = dpms::hypergeom_certificate_scale(n, z);
      CHECK(std::abs(dpms::ode_residual(n, z)) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("two-handle chain matches the quadratic formula") {
  // Roots of 1 + 4z + z^2 are -2 +- sqrt(3).
  const auto c = dpms::build_handles(2);
  REQUIRE(c.levels.size() == 2);
  REQUIRE(c.levels[0].size() == 1);
  REQUIRE(c.levels[1].size() == 2);
  CHECK(std::abs(c.levels[1][0] - (-2.0 + std::sqrt(3.0))) < 1e-14);
  CHECK(std::abs(c.levels[1][1] - (-2.0 - std::sqrt(3.0))) < 1e-13);
}

TEST_CASE("handle chains balance with ordered reciprocal roots") {
  for (int n = 1; n <= 10; ++n) {
    CAPTURE(n);
    const auto c = dpms::build_handles(n);
    CHECK(dpms::genus(c) == n);
    const auto r = dpms::force_report(c);
    CHECK(r.residual_norm < 1e-9);

    const auto& roots = c.levels[1];
    const size_t h = static_cast<size_t>(n) / 2;
    for (size_t j = 0; j < h; ++j) {
      CHECK(std::abs(roots[j]) < 1.0);
      CHECK(std::abs(roots[j] * roots[h + j] - 1.0) < 1e-10);
    }
    if (n % 2 == 1) CHECK(roots.back() == Complex(-1.0));
    for (const Complex& z : roots) {
      CHECK(z.imag() == 0.0);
      CHECK(z.real() < 0.0);
    }
  }
}

TEST_CASE("alternating chains balance exactly and have genus one") {
  for (int n = 2; n <= 8; n += 2) {
    const auto c = dpms::build_alternating(n);
    CHECK(dpms::genus(c) == 1);
    CHECK(dpms::force_report(c).residual_norm < 1e-14);
  }
  CHECK_THROWS_AS(dpms::build_alternating(3), std::invalid_argument);
  CHECK_THROWS_AS(dpms::build_alternating(0), std::invalid_argument);
}

TEST_CASE("upward force part at the first point is -1/2") {
  for (int n = 1; n <= 10; ++n) {
    const auto c = dpms::build_handles(n);
    CHECK(std::abs(dpms::force_plus(c, 0, 0) - Complex(-0.5)) < 1e-12);
  }
  for (int n = 2; n <= 8; n += 2) {
    const auto c = dpms::build_alternating(n);
    CHECK(std::abs(dpms::force_plus(c, 0, 0) - Complex(-0.5)) < 1e-12);
  }
}

TEST_CASE("radical chain with counts (2,3)") {
  const auto c = dpms::build_wei23();
  REQUIRE(c.levels.size() == 2);
  REQUIRE(c.levels[0].size() == 2);
  REQUIRE(c.levels[1].size() == 3);
  CHECK(dpms::genus(c) == 4);
  CHECK(dpms::force_report(c).residual_norm < 1e-10);
  // Each level is closed under inversion (up to the sign of -1).
  CHECK(std::abs(c.levels[0][0] * c.levels[0][1] - 1.0) < 1e-14);
  CHECK(std::abs(c.levels[1][0] * c.levels[1][2] - 1.0) < 1e-14);
  CHECK(c.levels[1][1] == Complex(-1.0));
}

TEST_CASE("combine concatenates balanced chains") {
  const auto stacked = dpms::combine(dpms::build_alternating(2), dpms::build_handles(2));
  REQUIRE(stacked.levels.size() == 4);
  CHECK(stacked.levels[0].size() == 1);
  CHECK(stacked.levels[1].size() == 1);
  CHECK(stacked.levels[2].size() == 1);
  CHECK(stacked.levels[3].size() == 2);
  CHECK(dpms::genus(stacked) == 2);
  CHECK(dpms::force_report(stacked).residual_norm < 1e-11);
  CHECK(std::abs(stacked.period) == 0.0);

  const auto duo = dpms::combine(dpms::build_handles(2), dpms::build_handles(3));
  CHECK(dpms::genus(duo) == 2 + 3 - 1);
  CHECK(dpms::force_report(duo).residual_norm < 1e-11);
}

TEST_CASE("combine rejects violated hypotheses") {
  // First level must hold a single point.
  CHECK_THROWS_AS(dpms::combine(dpms::build_wei23(), dpms::build_handles(2)),
                  dpms::HypothesisViolation);
  // First point must be 1.
  CHECK_THROWS_AS(dpms::combine(dpms::scale(dpms::build_handles(2), 2.0),
                                dpms::build_handles(2)),
                  dpms::HypothesisViolation);
  // Upward force parts must agree: a period-shifted alternating chain is
  // balanced with p2 = -exp(T/2) but its upward part is -1/(1+exp(T/2)).
  dpms::Configuration skew{{{1.0}, {-std::exp(0.25)}}, Complex(0.5)};
  dpms::validate(skew);
  REQUIRE(dpms::force_report(skew).residual_norm < 1e-14);
  CHECK_THROWS_AS(dpms::combine(dpms::build_alternating(2), skew),
                  dpms::HypothesisViolation);
}

TEST_CASE("combine carries residuals through unbalanced inputs") {
  // The seam forces telescope whether or not the inputs balance, so the
  // re-measured residual must stay within the verified bound.
  dpms::Configuration junk{{{1.0}, {2.0, -3.0}}, Complex(0.0)};
  dpms::validate(junk);
  const double rin = dpms::force_report(junk).residual_norm;
  const auto out = dpms::combine(junk, junk);
  CHECK(dpms::force_report(out).residual_norm <= 2.0 * rin + 1e-12);
}
