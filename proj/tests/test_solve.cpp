#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "dpms/catalog.hpp"
#include "dpms/solve.hpp"
#include "support/test_support.hpp"

using dpms::Complex;

namespace {

dpms::Configuration perturb(const dpms::Configuration& c, double radius,
                            std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-radius, radius);
  dpms::Configuration out = c;
  for (auto& lv : out.levels)
    for (auto& p : lv) p += Complex(u(rng), u(rng));
  return out;
}

}  // namespace

TEST_CASE("balanced input converges immediately") {
  const auto out = dpms::solve_balance(dpms::build_alternating(4), 1e-12, 50);
  CHECK(out.converged);
  CHECK(out.iterations == 0);
  CHECK(out.residual < 1e-14);
}

TEST_CASE("recovers perturbed handle chains") {
  std::mt19937_64 rng(7);
  const auto ideal = dpms::build_handles(4);
  for (int trial = 0; trial < 5; ++trial) {
    const auto start = perturb(ideal, 1e-2, rng);
    const auto out = dpms::solve_balance(start, 1e-12, 50);
    REQUIRE(out.converged);
    CHECK(out.iterations <= 25);
    // Undo the gauge: the frozen first point carries the perturbation as an
    // overall scale.
    const auto norm = dpms::canonicalize(out.config);
    for (int i = 0; i < 4; ++i) {
      double best = 1e300;
      for (int j = 0; j < 4; ++j) {
        best = std::min(best,
                        std::abs(norm.levels[1][static_cast<size_t>(i)] -
                                 ideal.levels[1][static_cast<size_t>(j)]));
      }
      CHECK(best < 1e-10);
    }
  }
}

TEST_CASE("solves the period-shifted two-level chain") {
  // With period T the balanced two-level chain has p2 = -exp(T/2).
  const Complex t(0.4, 0.3);
  dpms::Configuration start{{{1.0}, {Complex(-1.05, 0.02)}}, t};
  dpms::validate(start);
  const auto out = dpms::solve_balance(start, 1e-13, 50);
  REQUIRE(out.converged);
  CHECK(std::abs(out.config.levels[1][0] + std::exp(t / 2.0)) < 1e-10);
}

TEST_CASE("random initializations fall into the fourth-roots class") {
  // Converged outcomes split into two basins: the fourth-roots orbit and
  // boundary degenerations where a pair of points collapses to the puncture.
  // No converged outcome with genuinely distinct points lies outside the
  // fourth-roots class.
  std::mt19937_64 rng(20240815);
  std::uniform_real_distribution<double> modulus(0.5, 1.8);
  std::uniform_real_distribution<double> angle(-3.1, 3.1);
  int roots_class = 0;
  int collapses = 0;
  for (int trial = 0; trial < 10; ++trial) {
    dpms::Configuration start;
    start.period = 0.0;
    start.levels = {{std::polar(modulus(rng), angle(rng)),
                     std::polar(modulus(rng), angle(rng))},
                    {std::polar(modulus(rng), angle(rng)),
                     std::polar(modulus(rng), angle(rng))}};
    try {
      dpms::validate(start, 0.02);
    } catch (const dpms::DegenerateConfiguration&) {
      continue;
    }
    const auto out = dpms::solve_balance(start, 1e-11, 80);
    if (!out.converged) continue;
    if (dpms::is_puncture_collapse(out.config)) {
      ++collapses;
      continue;
    }
    ++roots_class;
    CHECK(dpms::is_fourth_roots_class(out.config, 1e-7));
  }
  CHECK(roots_class >= 3);
  CHECK(roots_class + collapses >= 5);
}

TEST_CASE("puncture collapse detector") {
  dpms::Configuration collapsed{
      {{1.0, Complex(1e-15, 1e-16)}, {-1.0, Complex(-1e-15, 0.0)}}, 0.0};
  CHECK(dpms::is_puncture_collapse(collapsed));
  CHECK_FALSE(dpms::is_puncture_collapse(dpms::build_wei23()));
  CHECK_FALSE(dpms::is_puncture_collapse(dpms::build_handles(6)));
}

TEST_CASE("fourth roots detector") {
  dpms::Configuration good{{{Complex(0, 2), Complex(0, -2)},
                            {Complex(-2, 0), Complex(2, 0)}},
                           0.0};
  CHECK(dpms::is_fourth_roots_class(good));
  dpms::Configuration bad{{{1.0, -1.0}, {2.0, -2.0}}, 0.0};
  CHECK_FALSE(dpms::is_fourth_roots_class(bad));
}
