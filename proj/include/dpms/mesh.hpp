#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpms/configuration.hpp"
#include "dpms/errors.hpp"
#include "dpms/forces.hpp"
#include "dpms/weierstrass.hpp"

// Triangle meshes for the near-degenerate surfaces attached to a balanced
// configuration.  For opening parameter r = exp(-1/t^2) the surface splits
// into graph-like level sheets joined by catenoid necks.  Levels are
// integrated from (G_k, eta_k); necks use the exact catenoid profile, and the
// gap where a neck meets a level is measured and reported, never hidden.
//
// Coordinate frame (mixed): the two horizontal components carry the 2*sqrt(r)
// rescaling, so the horizontal tiling period is exactly (0, 2*pi, 0) and each
// neck waist is centred at log(conj(p_{k,i})).  Heights are unscaled:
// consecutive level heights differ by (1/n_k) log r and the second
// independent period is (Re conj(T), Im conj(T), sum_k (1/n_k) log r).

namespace dpms {

inline constexpr double kPi = 3.14159265358979323846;

struct MeshParams {
  double t = 0.25;      // opening parameter, r = exp(-1/t^2); 0 < t <= 0.5
  double sigma = 0.3;   // neck cutoff exponent; 0 < sigma < 1/2
  int level_radial = 64;
  int level_angular = 128;
  int neck_vertical = 32;
  int neck_angular = 64;
  int copies = 1;       // fundamental domains tiled along (0, 2*pi, 0)
  double quad_tol = 1e-10;
  double mismatch_ceiling = 5.0;
};

struct LevelDiagnostics {
  long level = 0;
  double height = 0.0;      // anchored sheet height, attained at z -> infinity
  double height_min = 0.0;
  double height_max = 0.0;
  double end_inner_x = 0.0; // mean first coordinate on the inner grid rim
  double end_outer_x = 0.0;
  double loop_closure = 0.0;        // worst contractible-loop defect
  double tiling_deviation = 0.0;    // |seam monodromy - 2*pi*i|
  double height_integration_deviation = 0.0; // integrated vs closed form
  double ring_radius = 0.0;         // removed-disk radius in the z chart
  std::vector<Complex> ring_centers_a; // horizontal centres of upward holes
  std::vector<Complex> ring_centers_b; // and of downward holes
  std::vector<double> ring_heights_a;
  std::vector<double> ring_heights_b;
};

struct NeckDiagnostics {
  long level = 0;          // neck joins this level to the one below it
  std::size_t point = 0;
  double waist_circumference = 0.0; // unrescaled length, 2*pi/n_k
  double waist_height = 0.0;        // midpoint of the adjacent level heights
  double span = 0.0;                // vertical extent, (1 - 2*sigma)|log r|/n_k
  double boundary_mismatch = 0.0;   // worst gap against the paired level ring
  Complex center;                   // waist centre, horizontal mesh frame
};

struct MeshDiagnostics {
  double r = 0.0;
  std::vector<double> level_heights;
  std::vector<double> height_gaps;  // h_{k+1} - h_k = (1/n_k) log r
  std::vector<LevelDiagnostics> levels;
  std::vector<NeckDiagnostics> necks;
  std::array<double, 3> target_period{0.0, 0.0, 0.0};
  std::array<double, 3> achieved_period{0.0, 0.0, 0.0};
  double boundary_mismatch = 0.0;
  double loop_closure = 0.0;
  double tiling_deviation = 0.0;
  long genus_cycle_rank = 0;  // necks - levels + 1 per fundamental domain
  long genus_expected = 0;
};

struct SurfaceMesh {
  std::vector<std::array<double, 3>> vertices;
  std::vector<std::array<int, 3>> faces;
  std::vector<int> level_tag;  // per vertex: level index, -1 on necks
  std::vector<int> neck_tag;   // per vertex: neck index, -1 on levels
  MeshDiagnostics diagnostics;
};

inline void validate_mesh_params(const MeshParams& p) {
  if (!(p.t > 0.0) || !(p.t <= 0.5)) {
    throw std::invalid_argument("mesh parameter t must lie in (0, 0.5]");
  }
  if (!(p.sigma > 0.0) || !(p.sigma < 0.5)) {
    throw std::invalid_argument("mesh parameter sigma must lie in (0, 0.5)");
  }
  if (p.level_radial < 8 || p.level_angular < 8 || p.neck_vertical < 8 ||
      p.neck_angular < 8) {
    throw std::invalid_argument("mesh grid resolutions must be at least 8");
  }
  if (p.copies < 1) {
    throw std::invalid_argument("mesh copy count must be at least 1");
  }
  if (!(p.quad_tol > 0.0) || !(p.mismatch_ceiling > 0.0)) {
    throw std::invalid_argument("mesh tolerances must be positive");
  }
}

namespace detail {

// 12-point Gauss-Legendre rule on [-1, 1].
inline constexpr std::array<double, 6> kGaussNodes = {
    0.1252334085114689, 0.3678314989981802, 0.5873179542866175,
    0.7699026741943047, 0.9041172563704749, 0.9815606342467192};
inline constexpr std::array<double, 6> kGaussWeights = {
    0.2491470458134028, 0.2334925365383548, 0.2031674267230659,
    0.1600783285433462, 0.1069393259953184, 0.0471753363865118};

struct EdgeIntegrals {
  Complex inv_g;  // integral of eta / G_k
  Complex g_eta;  // integral of G_k * eta
  Complex eta;    // integral of eta
};

// One Gauss panel of all three 1-forms along the straight segment z0 -> z1.
inline EdgeIntegrals gauss_panel(const ParameterVector& x, long k, Complex z0,
                                 Complex z1) {
  const Complex mid = 0.5 * (z0 + z1);
  const Complex half = 0.5 * (z1 - z0);
  EdgeIntegrals acc{Complex(0.0, 0.0), Complex(0.0, 0.0), Complex(0.0, 0.0)};
  for (std::size_t q = 0; q < kGaussNodes.size(); ++q) {
    for (const double sgn : {-1.0, 1.0}) {
      const Complex z = mid + sgn * kGaussNodes[q] * half;
      const Complex g = gauss_component(x, static_cast<int>(k), z);
      const Complex e = eta_component(x, static_cast<int>(k), z);
      const double w = kGaussWeights[q];
      acc.inv_g += w * e / g;
      acc.g_eta += w * e * g;
      acc.eta += w * e;
    }
  }
  acc.inv_g *= half;
  acc.g_eta *= half;
  acc.eta *= half;
  return acc;
}

inline double edge_error(const EdgeIntegrals& a, const EdgeIntegrals& b) {
  return std::abs(a.inv_g - b.inv_g) + std::abs(a.g_eta - b.g_eta) +
         std::abs(a.eta - b.eta);
}

inline EdgeIntegrals integrate_edge_impl(const ParameterVector& x, long k,
                                         Complex z0, Complex z1, double tol,
                                         const EdgeIntegrals& whole,
                                         int depth) {
  const Complex mid = 0.5 * (z0 + z1);
  EdgeIntegrals left = gauss_panel(x, k, z0, mid);
  EdgeIntegrals right = gauss_panel(x, k, mid, z1);
  EdgeIntegrals sum{left.inv_g + right.inv_g, left.g_eta + right.g_eta,
                    left.eta + right.eta};
  const double scale = 1.0 + std::abs(sum.inv_g) + std::abs(sum.g_eta) +
                       std::abs(sum.eta);
  const double err = edge_error(whole, sum);
  if (err <= tol * scale) {
    return sum;
  }
  if (depth >= 30) {
    // Rounding noise (amplified near zero crossings of G_k) is not chased
    // below the tolerance floor; only a genuine failure to converge throws.
    if (err <= 1e3 * tol * scale) {
      return sum;
    }
    throw NumericalFailure("edge quadrature did not converge");
  }
  left = integrate_edge_impl(x, k, z0, mid, tol, left, depth + 1);
  right = integrate_edge_impl(x, k, mid, z1, tol, right, depth + 1);
  return EdgeIntegrals{left.inv_g + right.inv_g, left.g_eta + right.g_eta,
                       left.eta + right.eta};
}

inline EdgeIntegrals integrate_edge(const ParameterVector& x, long k,
                                    Complex z0, Complex z1, double tol) {
  return integrate_edge_impl(x, k, z0, z1, tol, gauss_panel(x, k, z0, z1), 0);
}

inline double segment_distance(Complex p, Complex a, Complex b) {
  const Complex d = b - a;
  const double len2 = std::norm(d);
  if (len2 == 0.0) return std::abs(p - a);
  double s = ((p.real() - a.real()) * d.real() +
              (p.imag() - a.imag()) * d.imag()) / len2;
  s = std::clamp(s, 0.0, 1.0);
  return std::abs(p - (a + s * d));
}

// Horizontal coordinate of one sheet, mixed frame.  s_k = -1 levels carry
// h = r * conj(I2) - I1, s_k = +1 levels carry h = conj(I1) - r * I2, so in
// both parities h ~ log(conj-chart z) near the punctures and the removed
// disks sit at log(conj(p)) after anchoring.
inline Complex sheet_horizontal(long k, double r, Complex i1, Complex i2) {
  if (level_exponent(k) < 0) {
    return r * std::conj(i2) - i1;
  }
  return std::conj(i1) - r * i2;
}

// Closed form of the sheet height: Re-integral of eta off the tree,
// normalised so the height tends to `base` as z -> infinity.
inline double sheet_height(const ParameterVector& x, long k, double base,
                           Complex z) {
  const int n = level_count(x);
  const auto kk = static_cast<std::size_t>(
      canonical_level(static_cast<int>(k), n));
  const auto prev = static_cast<std::size_t>(
      canonical_level(static_cast<int>(k) - 1, n));
  double h = base;
  for (std::size_t i = 0; i < x.a[kk].size(); ++i) {
    h += x.gammas[kk][i] * std::log(std::abs(z - x.a[kk][i]));
  }
  for (std::size_t i = 0; i < x.b[kk].size(); ++i) {
    h -= x.gammas[prev][i] * std::log(std::abs(z - x.b[kk][i]));
  }
  return h;
}

// Mean of the closed-form height over the circle |z - q| = rho around the
// pole q; every log term is harmonic away from its own centre, so the mean
// is exact by the mean-value property.
inline double ring_height_mean(const ParameterVector& x, long k, double base,
                               Complex q, double rho) {
  const int n = level_count(x);
  const auto kk = static_cast<std::size_t>(
      canonical_level(static_cast<int>(k), n));
  const auto prev = static_cast<std::size_t>(
      canonical_level(static_cast<int>(k) - 1, n));
  double h = base;
  for (std::size_t i = 0; i < x.a[kk].size(); ++i) {
    const double d = std::abs(q - x.a[kk][i]);
    h += x.gammas[kk][i] * std::log(d <= rho ? rho : d);
  }
  for (std::size_t i = 0; i < x.b[kk].size(); ++i) {
    const double d = std::abs(q - x.b[kk][i]);
    h -= x.gammas[prev][i] * std::log(d <= rho ? rho : d);
  }
  return h;
}

struct LevelSheet {
  std::vector<std::array<double, 3>> vertices;
  std::vector<std::array<int, 3>> faces;
  LevelDiagnostics diag;
  std::vector<double> ring_mesh_radius_a;  // hole radii in the mesh frame
  std::vector<double> ring_mesh_radius_b;
};

inline double min_pole_separation(const std::vector<Complex>& poles) {
  double sep = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poles.size(); ++i) {
    for (std::size_t j = i + 1; j < poles.size(); ++j) {
      sep = std::min(sep, std::abs(poles[i] - poles[j]));
    }
  }
  return sep;
}

inline LevelSheet build_level_sheet(const ParameterVector& x, long k,
                                    double base_height,
                                    const MeshParams& params) {
  const auto kk = static_cast<std::size_t>(
      canonical_level(static_cast<int>(k), level_count(x)));
  const double r = std::exp(-1.0 / (params.t * params.t));

  std::vector<Complex> poles = x.a[kk];
  poles.insert(poles.end(), x.b[kk].begin(), x.b[kk].end());
  const double eps = 0.5 * min_pole_separation(poles);
  const double rho_hole = eps * std::pow(r, params.sigma);

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const Complex& q : poles) {
    lo = std::min(lo, std::log(std::abs(q)));
    hi = std::max(hi, std::log(std::abs(q)));
  }
  lo -= 2.5;
  hi += 2.5;

  const int R = params.level_radial;
  const int A = params.level_angular;
  const double dx = (hi - lo) / (R - 1);
  const double dth = 2.0 * kPi / A;

  std::vector<Complex> grid(static_cast<std::size_t>(R) * A);
  std::vector<char> alive(grid.size(), 1);
  auto vid = [A](int i, int j) {
    return static_cast<std::size_t>(i) * A + static_cast<std::size_t>(j);
  };
  for (int i = 0; i < R; ++i) {
    for (int j = 0; j < A; ++j) {
      const double xr = lo + i * dx;
      const double th = -kPi + j * dth;
      const Complex z = std::exp(Complex(xr, th));
      grid[vid(i, j)] = z;
      for (const Complex& q : poles) {
        if (std::abs(z - q) <= 1.05 * rho_hole) {
          alive[vid(i, j)] = 0;
          break;
        }
      }
    }
  }

  // Grid edges.  The angular seam theta = +-pi is left open; the adjacent
  // copy along (0, 2*pi, 0) continues the sheet there.
  struct Edge {
    std::size_t v0, v1;
    EdgeIntegrals vals;
    bool tree = false;
  };
  std::vector<Edge> edges;
  edges.reserve(grid.size() * 2);
  auto edge_open = [&](std::size_t u, std::size_t v) {
    if (!alive[u] || !alive[v]) return false;
    for (const Complex& q : poles) {
      if (segment_distance(q, grid[u], grid[v]) <= 1.05 * rho_hole)
        return false;
    }
    return true;
  };
  for (int i = 0; i < R; ++i) {
    for (int j = 0; j < A; ++j) {
      if (i + 1 < R && edge_open(vid(i, j), vid(i + 1, j))) {
        edges.push_back({vid(i, j), vid(i + 1, j), {}, false});
      }
      if (j + 1 < A && edge_open(vid(i, j), vid(i, j + 1))) {
        edges.push_back({vid(i, j), vid(i, j + 1), {}, false});
      }
    }
  }
  for (Edge& e : edges) {
    e.vals = integrate_edge(x, k, grid[e.v0], grid[e.v1], params.quad_tol);
  }

  std::vector<std::vector<std::size_t>> incident(grid.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    incident[edges[e].v0].push_back(e);
    incident[edges[e].v1].push_back(e);
  }

  // Base vertex: one neck-annulus scale away from the first upward pole.
  const Complex base_target =
      x.a[kk][0] * (1.0 + eps / std::abs(x.a[kk][0]));
  std::size_t base = grid.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < grid.size(); ++v) {
    if (!alive[v]) continue;
    const double d = std::abs(grid[v] - base_target);
    if (d < best) {
      best = d;
      base = v;
    }
  }
  if (base == grid.size()) {
    throw NumericalFailure("level grid has no usable vertices");
  }

  std::vector<char> reached(grid.size(), 0);
  std::vector<EdgeIntegrals> pot(
      grid.size(), EdgeIntegrals{Complex(0, 0), Complex(0, 0), Complex(0, 0)});
  std::queue<std::size_t> bfs;
  bfs.push(base);
  reached[base] = 1;
  while (!bfs.empty()) {
    const std::size_t v = bfs.front();
    bfs.pop();
    for (const std::size_t ei : incident[v]) {
      Edge& e = edges[ei];
      const std::size_t w = (e.v0 == v) ? e.v1 : e.v0;
      if (reached[w]) continue;
      const double sgn = (e.v0 == v) ? 1.0 : -1.0;
      pot[w].inv_g = pot[v].inv_g + sgn * e.vals.inv_g;
      pot[w].g_eta = pot[v].g_eta + sgn * e.vals.g_eta;
      pot[w].eta = pot[v].eta + sgn * e.vals.eta;
      reached[w] = 1;
      e.tree = true;
      bfs.push(w);
    }
  }

  std::vector<Complex> horiz(grid.size());
  for (std::size_t v = 0; v < grid.size(); ++v) {
    if (reached[v]) {
      horiz[v] = sheet_horizontal(k, r, pot[v].inv_g, pot[v].g_eta);
    }
  }

  // Anchor: the ring centre of the first upward hole is log(conj(p_{k,0})),
  // i.e. -Log a in the conjugated chart.  Any nearby vertex recovers the
  // centre after removing its own logarithmic offset.
  const double delta = x.deltas[kk];
  auto center_from = [&](std::size_t v, Complex q) {
    const Complex step = std::log(grid[v] / q) / delta;
    if (level_exponent(k) < 0) return horiz[v] + step;
    return horiz[v] - std::conj(step);
  };
  auto measured_center = [&](Complex q) {
    // Mean over the nearest usable vertices; each one gives the centre up to
    // the O(r) tail of the sheet.  Vertices on the far side of the angular
    // seam sit one y period away, so only the cluster around the nearest
    // vertex's estimate is averaged.
    std::vector<std::pair<double, std::size_t>> near;
    for (std::size_t v = 0; v < grid.size(); ++v) {
      if (!reached[v]) continue;
      near.emplace_back(std::abs(grid[v] - q), v);
    }
    std::sort(near.begin(), near.end(),
              [](const auto& l, const auto& r2) { return l.first < r2.first; });
    const std::size_t take = std::min<std::size_t>(8, near.size());
    const Complex ref = center_from(near.front().second, q);
    Complex sum(0.0, 0.0);
    double count = 0.0;
    for (std::size_t m = 0; m < take; ++m) {
      const Complex est = center_from(near[m].second, q);
      if (std::abs(est - ref) < 1.0) {
        sum += est;
        count += 1.0;
      }
    }
    return sum / count;
  };

  const Complex anchor_q = x.a[kk][0];
  const Complex target = (level_exponent(k) < 0)
                             ? -std::log(anchor_q) / delta
                             : std::conj(std::log(anchor_q)) / delta;
  const Complex shift = target - measured_center(anchor_q);
  for (std::size_t v = 0; v < grid.size(); ++v) {
    if (reached[v]) horiz[v] += shift;
  }

  LevelSheet sheet;
  sheet.diag.level = k;
  sheet.diag.height = base_height;
  sheet.diag.ring_radius = rho_hole;

  // Loop defects over non-tree edges: contractible cycles must close, and
  // cycles around a removed disk pick up only the O(r) residue term.
  double closure = 0.0;
  double height_dev = 0.0;
  for (const Edge& e : edges) {
    if (e.tree) continue;
    const Complex d1 = pot[e.v1].inv_g - pot[e.v0].inv_g - e.vals.inv_g;
    const Complex d2 = pot[e.v1].g_eta - pot[e.v0].g_eta - e.vals.g_eta;
    const Complex d3 = pot[e.v1].eta - pot[e.v0].eta - e.vals.eta;
    const Complex dh = sheet_horizontal(k, r, d1, d2);
    closure = std::max(closure, std::abs(dh));
    closure = std::max(closure, std::abs(d3.real()));
  }
  sheet.diag.loop_closure = closure;

  // Seam monodromy: continuing across theta = +-pi must advance the
  // horizontal coordinate by exactly 2*pi*i / delta.
  double tiling = 0.0;
  const Complex expected_jump(0.0, 2.0 * kPi / delta);
  for (int i = 0; i < R; i += 7) {
    const std::size_t u = vid(i, A - 1);
    const std::size_t v = vid(i, 0);
    if (!reached[u] || !reached[v]) continue;
    bool blocked = false;
    for (const Complex& q : poles) {
      if (segment_distance(q, grid[u], grid[v]) <= 1.05 * rho_hole)
        blocked = true;
    }
    if (blocked) continue;
    const EdgeIntegrals seam =
        integrate_edge(x, k, grid[u], grid[v], params.quad_tol);
    const Complex cont = sheet_horizontal(
        k, r, pot[u].inv_g + seam.inv_g, pot[u].g_eta + seam.g_eta) + shift;
    tiling = std::max(tiling, std::abs((horiz[v] - cont) - expected_jump));
  }
  sheet.diag.tiling_deviation = tiling;

  // Vertices and the integrated-height self check.
  std::vector<int> emit(grid.size(), -1);
  double hmin = std::numeric_limits<double>::infinity();
  double hmax = -std::numeric_limits<double>::infinity();
  const double tail =
      sheet_height(x, k, base_height, grid[base]) - pot[base].eta.real();
  for (std::size_t v = 0; v < grid.size(); ++v) {
    if (!reached[v]) continue;
    const double h = sheet_height(x, k, base_height, grid[v]);
    height_dev = std::max(height_dev,
                          std::abs(pot[v].eta.real() + tail - h));
    emit[v] = static_cast<int>(sheet.vertices.size());
    sheet.vertices.push_back({horiz[v].real(), horiz[v].imag(), h});
    hmin = std::min(hmin, h);
    hmax = std::max(hmax, h);
  }
  sheet.diag.height_min = hmin;
  sheet.diag.height_max = hmax;
  sheet.diag.height_integration_deviation = height_dev;

  // One grid cell is dropped over every pole so the neck has an opening.
  auto cell_has_pole = [&](int i, int j) {
    for (const Complex& q : poles) {
      const double qx = std::log(std::abs(q));
      double qt = std::arg(q);
      const int iq = static_cast<int>(std::floor((qx - lo) / dx));
      const int jq = static_cast<int>(std::floor((qt + kPi) / dth));
      if (iq == i && jq == j) return true;
    }
    return false;
  };
  auto coherent = [&](std::size_t u, std::size_t v) {
    return std::abs(horiz[u] - horiz[v]) < 2.0;
  };
  for (int i = 0; i + 1 < R; ++i) {
    for (int j = 0; j + 1 < A; ++j) {
      const std::size_t c00 = vid(i, j), c10 = vid(i + 1, j);
      const std::size_t c11 = vid(i + 1, j + 1), c01 = vid(i, j + 1);
      if (emit[c00] < 0 || emit[c10] < 0 || emit[c11] < 0 || emit[c01] < 0)
        continue;
      if (cell_has_pole(i, j)) continue;
      if (!coherent(c00, c10) || !coherent(c10, c11) || !coherent(c11, c01) ||
          !coherent(c01, c00))
        continue;
      sheet.faces.push_back({emit[c00], emit[c10], emit[c11]});
      sheet.faces.push_back({emit[c00], emit[c11], emit[c01]});
    }
  }

  // End plateaus: mean first coordinate along the inner and outer rims.
  double inner = 0.0, outer = 0.0;
  int inner_n = 0, outer_n = 0;
  for (int j = 0; j < A; ++j) {
    if (reached[vid(0, j)]) {
      inner += horiz[vid(0, j)].real();
      ++inner_n;
    }
    if (reached[vid(R - 1, j)]) {
      outer += horiz[vid(R - 1, j)].real();
      ++outer_n;
    }
  }
  sheet.diag.end_inner_x = inner_n ? inner / inner_n : 0.0;
  sheet.diag.end_outer_x = outer_n ? outer / outer_n : 0.0;

  // `horiz` is already anchored here, so the measured centres are final.
  for (const Complex& q : x.a[kk]) {
    sheet.diag.ring_centers_a.push_back(measured_center(q));
    sheet.diag.ring_heights_a.push_back(
        ring_height_mean(x, k, base_height, q, rho_hole));
    sheet.ring_mesh_radius_a.push_back(rho_hole / (delta * std::abs(q)));
  }
  for (const Complex& q : x.b[kk]) {
    sheet.diag.ring_centers_b.push_back(measured_center(q));
    sheet.diag.ring_heights_b.push_back(
        ring_height_mean(x, k, base_height, q, rho_hole));
    sheet.ring_mesh_radius_b.push_back(rho_hole / (delta * std::abs(q)));
  }
  return sheet;
}

struct NeckSpec {
  long level = 0;
  std::size_t point = 0;
  double n = 1.0;            // weight order of the joined levels
  double top_height = 0.0;
  double bot_height = 0.0;
  Complex top_center;
  Complex bot_center;
};

// Exact catenoid: waist radius 2*sqrt(r)/n in the mesh frame (circumference
// 2*pi/n before rescaling), profile rho(h) = (2*sqrt(r)/n) cosh(n (h - mid)).
inline void emit_neck(const NeckSpec& spec, double r, const MeshParams& params,
                      int neck_id, SurfaceMesh& out, NeckDiagnostics& diag) {
  if (!(spec.top_height > spec.bot_height)) {
    throw NumericalFailure(
        "neck cutoff heights overlap; reduce sigma or the opening parameter");
  }
  const double n = spec.n;
  const double waist = 2.0 * std::sqrt(r) / n;
  const double mid = 0.5 * (spec.top_height + spec.bot_height);

  Complex top = spec.top_center;
  Complex bot = spec.bot_center;
  // Align the angular branch of the two centres across the y period.
  const double wind =
      std::round((top.imag() - bot.imag()) / (2.0 * kPi)) * 2.0 * kPi;
  bot += Complex(0.0, wind);

  diag.level = spec.level;
  diag.point = spec.point;
  diag.waist_circumference = 2.0 * kPi / n;
  diag.waist_height = mid;
  diag.span = spec.top_height - spec.bot_height;
  diag.center = 0.5 * (top + bot);

  const int V = params.neck_vertical;
  const int A = params.neck_angular;
  const int first = static_cast<int>(out.vertices.size());
  for (int j = 0; j < V; ++j) {
    const double h = spec.bot_height +
                     diag.span * static_cast<double>(j) / (V - 1);
    const double rho = waist * std::cosh(n * (h - mid));
    const double s = (h - spec.bot_height) / diag.span;
    const Complex c = bot + s * (top - bot);
    for (int l = 0; l < A; ++l) {
      const double phi = 2.0 * kPi * l / A;
      out.vertices.push_back(
          {c.real() + rho * std::cos(phi), c.imag() + rho * std::sin(phi), h});
      out.level_tag.push_back(-1);
      out.neck_tag.push_back(neck_id);
    }
  }
  for (int j = 0; j + 1 < V; ++j) {
    for (int l = 0; l < A; ++l) {
      const int l2 = (l + 1) % A;
      const int v00 = first + j * A + l;
      const int v01 = first + j * A + l2;
      const int v10 = first + (j + 1) * A + l;
      const int v11 = first + (j + 1) * A + l2;
      out.faces.push_back({v00, v10, v11});
      out.faces.push_back({v00, v11, v01});
    }
  }
}

inline void append_sheet(const LevelSheet& sheet, long k, SurfaceMesh& out) {
  const int first = static_cast<int>(out.vertices.size());
  out.vertices.insert(out.vertices.end(), sheet.vertices.begin(),
                      sheet.vertices.end());
  for (std::size_t v = 0; v < sheet.vertices.size(); ++v) {
    out.level_tag.push_back(static_cast<int>(k));
    out.neck_tag.push_back(-1);
  }
  for (const auto& f : sheet.faces) {
    out.faces.push_back({f[0] + first, f[1] + first, f[2] + first});
  }
}

}  // namespace detail

// One level sheet: log-polar annulus around the level's poles with the neck
// disks removed, integrated from the base vertex over a spanning tree.
inline SurfaceMesh level_patch(const Configuration& c, long k,
                               const MeshParams& params = MeshParams{}) {
  validate_mesh_params(params);
  validate(c);
  const ParameterVector x = x_from_config(c);
  const double r = std::exp(-1.0 / (params.t * params.t));
  const long n_levels = level_count(x);
  double h = 0.0;
  for (long j = 0; j < ((k % n_levels) + n_levels) % n_levels; ++j) {
    h += std::log(r) / static_cast<double>(count_at(c, j));
  }
  const detail::LevelSheet sheet =
      detail::build_level_sheet(x, k, h, params);
  SurfaceMesh mesh;
  detail::append_sheet(sheet, k, mesh);
  mesh.diagnostics.r = r;
  mesh.diagnostics.levels.push_back(sheet.diag);
  mesh.diagnostics.loop_closure = sheet.diag.loop_closure;
  mesh.diagnostics.tiling_deviation = sheet.diag.tiling_deviation;
  return mesh;
}

// One neck as a free-standing fragment with the ideal cutoff heights.
inline SurfaceMesh neck_patch(const Configuration& c, long k, std::size_t i,
                              const MeshParams& params = MeshParams{}) {
  validate_mesh_params(params);
  validate(c);
  const long N = level_count(c);
  const long kk = ((k % N) + N) % N;
  const std::size_t nk = count_at(c, kk);
  if (i >= nk) {
    throw std::invalid_argument("neck point index out of range");
  }
  const double r = std::exp(-1.0 / (params.t * params.t));
  const double L = std::log(r);
  double h = 0.0;
  for (long j = 0; j < kk; ++j) {
    h += L / static_cast<double>(count_at(c, j));
  }
  const double n = static_cast<double>(nk);
  detail::NeckSpec spec;
  spec.level = kk;
  spec.point = i;
  spec.n = n;
  spec.top_height = h + params.sigma * L / n;
  spec.bot_height = h + (1.0 - params.sigma) * L / n;
  spec.top_center = std::log(std::conj(point_at(c, kk, i)));
  spec.bot_center = spec.top_center;

  SurfaceMesh mesh;
  mesh.diagnostics.r = r;
  NeckDiagnostics diag;
  detail::emit_neck(spec, r, params, 0, mesh, diag);
  mesh.diagnostics.necks.push_back(diag);
  return mesh;
}

// Full fundamental domain: all level sheets, all necks fitted between the
// measured cutoff rings, tiled `copies` times along the horizontal period.
inline SurfaceMesh assemble_surface(const Configuration& c,
                                    const MeshParams& params = MeshParams{}) {
  validate_mesh_params(params);
  validate(c);
  const ForceReport report = force_report(c);
  if (!(report.residual_norm <= 1e-6)) {
    throw HypothesisViolation(
        "configuration is not balanced; solve it before meshing");
  }

  const ParameterVector x = x_from_config(c);
  const long N = level_count(c);
  const double r = std::exp(-1.0 / (params.t * params.t));
  const double L = std::log(r);

  std::vector<double> heights(static_cast<std::size_t>(N) + 1, 0.0);
  for (long k = 0; k < N; ++k) {
    heights[static_cast<std::size_t>(k) + 1] =
        heights[static_cast<std::size_t>(k)] +
        L / static_cast<double>(count_at(c, k));
  }
  const double period_z = heights[static_cast<std::size_t>(N)];
  const Complex period_xy = std::conj(c.period);

  std::vector<detail::LevelSheet> sheets;
  sheets.reserve(static_cast<std::size_t>(N));
  for (long k = 0; k < N; ++k) {
    sheets.push_back(detail::build_level_sheet(
        x, k, heights[static_cast<std::size_t>(k)], params));
  }

  SurfaceMesh mesh;
  MeshDiagnostics& diag = mesh.diagnostics;
  diag.r = r;
  diag.genus_expected = genus(c);

  long neck_total = 0;
  for (long k = 0; k < N; ++k) {
    detail::append_sheet(sheets[static_cast<std::size_t>(k)], k, mesh);
    diag.levels.push_back(sheets[static_cast<std::size_t>(k)].diag);
    diag.level_heights.push_back(heights[static_cast<std::size_t>(k)]);
    diag.height_gaps.push_back(heights[static_cast<std::size_t>(k) + 1] -
                               heights[static_cast<std::size_t>(k)]);
    diag.loop_closure = std::max(
        diag.loop_closure, sheets[static_cast<std::size_t>(k)].diag.loop_closure);
    diag.tiling_deviation =
        std::max(diag.tiling_deviation,
                 sheets[static_cast<std::size_t>(k)].diag.tiling_deviation);
    neck_total += static_cast<long>(count_at(c, k));
  }
  diag.genus_cycle_rank = neck_total - N + 1;

  // Necks: seam k joins the a-rings of level k to the b-rings of level
  // (k+1) mod N; the wrap seam lands one vertical period down and one
  // horizontal period conj(T) over.
  Complex achieved_xy(0.0, 0.0);
  double achieved_z = 0.0;
  int neck_id = 0;
  for (long k = 0; k < N; ++k) {
    const detail::LevelSheet& top_sheet = sheets[static_cast<std::size_t>(k)];
    const long k1 = (k + 1) % N;
    const detail::LevelSheet& bot_sheet = sheets[static_cast<std::size_t>(k1)];
    const bool wrap = (k1 != k + 1);
    const std::size_t nk = count_at(c, k);
    const double n = static_cast<double>(nk);

    Complex seam_xy(0.0, 0.0);
    double seam_drop = 0.0;
    for (std::size_t i = 0; i < nk; ++i) {
      // The neck spans the ideal cutoff heights (sigma |log r| / n_k inside
      // either adjacent level), so its waist sits exactly at the midpoint of
      // the two level heights.  The offset between its rims and the measured
      // cutoff rings is the shortcut error and lands in boundary_mismatch.
      detail::NeckSpec spec;
      spec.level = k;
      spec.point = i;
      spec.n = n;
      spec.top_height =
          heights[static_cast<std::size_t>(k)] + params.sigma * L / n;
      spec.bot_height =
          heights[static_cast<std::size_t>(k) + 1] - params.sigma * L / n;
      spec.top_center = top_sheet.diag.ring_centers_a[i];
      spec.bot_center = bot_sheet.diag.ring_centers_b[i] +
                        (wrap ? period_xy : Complex(0.0, 0.0));

      NeckDiagnostics nd;
      detail::emit_neck(spec, r, params, neck_id, mesh, nd);

      // Worst gap against the paired level rings: vertical offset of the rim
      // from the ring, plus the radius difference between the catenoid rim
      // and the removed disk.  Centre offsets are zero by construction.
      const double rim =
          (2.0 * std::sqrt(r) / n) * std::cosh(n * 0.5 * nd.span);
      const double top_gap =
          std::abs(spec.top_height - top_sheet.diag.ring_heights_a[i]) +
          std::abs(rim - top_sheet.ring_mesh_radius_a[i]);
      const double bot_gap =
          std::abs(spec.bot_height - (bot_sheet.diag.ring_heights_b[i] +
                                      (wrap ? period_z : 0.0))) +
          std::abs(rim - bot_sheet.ring_mesh_radius_b[i]);
      nd.boundary_mismatch = std::max(top_gap, bot_gap);
      diag.boundary_mismatch = std::max(diag.boundary_mismatch,
                                        nd.boundary_mismatch);
      diag.necks.push_back(nd);
      ++neck_id;

      Complex dxy = top_sheet.diag.ring_centers_a[i] -
                    bot_sheet.diag.ring_centers_b[i];
      dxy -= Complex(0.0, std::round(dxy.imag() / (2.0 * kPi)) * 2.0 * kPi);
      seam_xy += dxy;
      seam_drop += (bot_sheet.diag.ring_heights_b[i] +
                    (wrap ? period_z : 0.0)) -
                   top_sheet.diag.ring_heights_a[i];
    }
    achieved_xy += seam_xy / n;
    achieved_z += seam_drop / n;
  }
  for (long k = 0; k < N; ++k) {
    const detail::LevelSheet& s = sheets[static_cast<std::size_t>(k)];
    double a_mean = 0.0, b_mean = 0.0;
    for (const double h : s.diag.ring_heights_a) a_mean += h;
    for (const double h : s.diag.ring_heights_b) b_mean += h;
    achieved_z += a_mean / static_cast<double>(s.diag.ring_heights_a.size()) -
                  b_mean / static_cast<double>(s.diag.ring_heights_b.size());
  }

  diag.target_period = {period_xy.real(), period_xy.imag(), period_z};
  diag.achieved_period = {achieved_xy.real(), achieved_xy.imag(), achieved_z};

  if (diag.boundary_mismatch > params.mismatch_ceiling) {
    throw NumericalFailure(
        "neck-to-level boundary mismatch " +
        std::to_string(diag.boundary_mismatch) +
        " exceeds the ceiling " + std::to_string(params.mismatch_ceiling));
  }

  // Tile the remaining copies along the exact horizontal period.
  const std::size_t base_vertices = mesh.vertices.size();
  const std::size_t base_faces = mesh.faces.size();
  for (int m = 1; m < params.copies; ++m) {
    const int offset = static_cast<int>(mesh.vertices.size());
    const double shift = 2.0 * kPi * m;
    for (std::size_t v = 0; v < base_vertices; ++v) {
      const auto& p = mesh.vertices[v];
      mesh.vertices.push_back({p[0], p[1] + shift, p[2]});
      mesh.level_tag.push_back(mesh.level_tag[v]);
      mesh.neck_tag.push_back(mesh.neck_tag[v]);
    }
    for (std::size_t f = 0; f < base_faces; ++f) {
      const auto& tri = mesh.faces[f];
      mesh.faces.push_back(
          {tri[0] + offset, tri[1] + offset, tri[2] + offset});
    }
  }
  return mesh;
}

// Plain-text OBJ: header comment, then vertices, then 1-based faces.  The
// formatting is deterministic and preserves doubles exactly.
inline void export_obj(const SurfaceMesh& mesh, std::ostream& out) {
  out << "# dpms surface mesh\n";
  char line[128];
  for (const auto& v : mesh.vertices) {
    std::snprintf(line, sizeof(line), "v %.17g %.17g %.17g\n", v[0], v[1],
                  v[2]);
    out << line;
  }
  for (const auto& f : mesh.faces) {
    std::snprintf(line, sizeof(line), "f %d %d %d\n", f[0] + 1, f[1] + 1,
                  f[2] + 1);
    out << line;
  }
  if (!out) {
    throw std::runtime_error("failed while writing OBJ stream");
  }
}

inline void export_obj_file(const SurfaceMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open OBJ output file: " + path);
  }
  export_obj(mesh, out);
  out.flush();
  if (!out) {
    throw std::runtime_error("failed while writing OBJ file: " + path);
  }
}

}  // namespace dpms
