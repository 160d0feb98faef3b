#pragma once

#include <complex>
#include <random>
#include <vector>

#include "dpms/configuration.hpp"

namespace testsupport {

using dpms::Complex;

inline dpms::Configuration make_config(
    std::vector<std::vector<Complex>> levels, Complex period = {}) {
  dpms::Configuration c{std::move(levels), period};
  dpms::validate(c);
  return c;
}

// Random configuration with comfortable point separation (validated at a
// coarse tolerance so derivative and force magnitudes stay tame).
inline dpms::Configuration random_configuration(std::mt19937_64& rng,
                                                bool with_period = false) {
  std::uniform_int_distribution<int> half_levels(1, 2);
  std::uniform_int_distribution<int> points_per_level(1, 3);
  std::uniform_real_distribution<double> modulus(0.4, 2.2);
  std::uniform_real_distribution<double> angle(-3.141592, 3.141592);
  std::uniform_real_distribution<double> tshift(-0.5, 0.5);
  for (;;) {
    dpms::Configuration c;
    const int n = 2 * half_levels(rng);
    c.levels.resize(static_cast<size_t>(n));
    for (auto& lv : c.levels) {
      const int m = points_per_level(rng);
      for (int i = 0; i < m; ++i) {
        lv.push_back(std::polar(modulus(rng), angle(rng)));
      }
    }
    c.period = with_period ? Complex(tshift(rng), tshift(rng)) : Complex{};
    try {
      dpms::validate(c, 0.05);
    } catch (const dpms::DegenerateConfiguration&) {
      continue;
    }
    return c;
  }
}

}  // namespace testsupport
