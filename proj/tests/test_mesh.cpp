#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <vector>

#include "dpms/catalog.hpp"
#include "dpms/mesh.hpp"

using dpms::Complex;
using dpms::Configuration;
using dpms::MeshParams;
using dpms::SurfaceMesh;

namespace {

MeshParams coarse_params() {
  MeshParams p;
  p.level_radial = 16;
  p.level_angular = 32;
  p.neck_vertical = 8;
  p.neck_angular = 12;
  return p;
}

void check_face_indices(const SurfaceMesh& mesh) {
  REQUIRE(mesh.level_tag.size() == mesh.vertices.size());
  REQUIRE(mesh.neck_tag.size() == mesh.vertices.size());
  for (const auto& f : mesh.faces) {
    for (int corner : f) {
      REQUIRE(corner >= 0);
      REQUIRE(corner < static_cast<int>(mesh.vertices.size()));
    }
  }
}

}  // namespace

TEST_CASE("mesh parameters are range checked") {
  MeshParams p;
  REQUIRE_NOTHROW(dpms::validate_mesh_params(p));

  MeshParams bad = p;
  bad.t = 0.0;
  REQUIRE_THROWS_AS(dpms::validate_mesh_params(bad), std::invalid_argument);
  bad = p;
  bad.t = 0.6;
  REQUIRE_THROWS_AS(dpms::validate_mesh_params(bad), std::invalid_argument);
  bad = p;
  bad.sigma = 0.5;
  REQUIRE_THROWS_AS(dpms::validate_mesh_params(bad), std::invalid_argument);
  bad = p;
  bad.sigma = 0.0;
  REQUIRE_THROWS_AS(dpms::validate_mesh_params(bad), std::invalid_argument);
  bad = p;
  bad.level_radial = 7;
  REQUIRE_THROWS_AS(dpms::validate_mesh_params(bad), std::invalid_argument);
  bad = p;
  bad.neck_angular = 4;
  REQUIRE_THROWS_AS(dpms::validate_mesh_params(bad), std::invalid_argument);
  bad = p;
  bad.copies = 0;
  REQUIRE_THROWS_AS(dpms::validate_mesh_params(bad), std::invalid_argument);
}

TEST_CASE("level sheets carry the graph geometry of the limit") {
  const Configuration c = dpms::build_handles(1);
  const MeshParams p;
  const double sig_l = p.sigma / (p.t * p.t);  // sigma |log r| per unit weight

  const SurfaceMesh lv0 = dpms::level_patch(c, 0, p);
  const SurfaceMesh lv1 = dpms::level_patch(c, 1, p);
  check_face_indices(lv0);
  check_face_indices(lv1);
  REQUIRE_FALSE(lv0.vertices.empty());
  REQUIRE_FALSE(lv0.faces.empty());

  const dpms::LevelDiagnostics& d0 = lv0.diagnostics.levels.at(0);
  const dpms::LevelDiagnostics& d1 = lv1.diagnostics.levels.at(0);

  // Ends: the sheet rises toward the inner puncture on the first level and
  // falls there on the second, mirroring the alternating normal directions.
  REQUIRE(d0.end_inner_x > 1.0);
  REQUIRE(d0.end_outer_x < -1.0);
  REQUIRE(d1.end_inner_x < -1.0);
  REQUIRE(d1.end_outer_x > 1.0);

  // Integration is path independent and matches the closed-form height.
  REQUIRE(d0.loop_closure <= 1e-8);
  REQUIRE(d1.loop_closure <= 1e-8);
  REQUIRE(d0.height_integration_deviation <= 1e-8);
  REQUIRE(d1.height_integration_deviation <= 1e-8);

  // Continuing across the angular seam advances by one horizontal period.
  REQUIRE(d0.tiling_deviation <= 1e-8);
  REQUIRE(d1.tiling_deviation <= 1e-8);

  // Vertical extent: within sigma |log r| / n_k of the sheet height, plus a
  // bounded constant from the finite pole separations.
  REQUIRE(d0.height_max <= d0.height + sig_l + 3.0);
  REQUIRE(d0.height_min >= d0.height - sig_l - 3.0);
  REQUIRE(d1.height == Catch::Approx(std::log(lv1.diagnostics.r)).margin(1e-12));

  // Hole rings: the first level is anchored so its upward hole sits at the
  // origin of the horizontal frame; the downward hole sits half a turn away.
  REQUIRE(std::abs(d0.ring_centers_a.at(0)) <= 1e-6);
  REQUIRE(std::abs(std::abs(d0.ring_centers_b.at(0).imag()) -
                   dpms::kPi) <= 1e-5);
  REQUIRE(std::abs(d0.ring_centers_b.at(0).real()) <= 1e-5);

  // Ring heights agree with the explicit logarithm sums.
  const double rho = d0.ring_radius;
  REQUIRE(d0.ring_heights_a.at(0) ==
          Catch::Approx(std::log(rho) - std::log(2.0)).epsilon(1e-12));
  REQUIRE(d0.ring_heights_b.at(0) ==
          Catch::Approx(std::log(2.0) - std::log(rho)).epsilon(1e-12));
}

TEST_CASE("neck patches are exact catenoids") {
  const Configuration c = dpms::build_handles(1);
  const MeshParams p;
  const double r = std::exp(-1.0 / (p.t * p.t));
  const double L = std::log(r);

  const SurfaceMesh neck = dpms::neck_patch(c, 0, 0, p);
  check_face_indices(neck);
  const dpms::NeckDiagnostics& nd = neck.diagnostics.necks.at(0);

  REQUIRE(nd.waist_circumference ==
          Catch::Approx(2.0 * dpms::kPi).epsilon(1e-14));
  REQUIRE(nd.waist_height == Catch::Approx(0.5 * L).margin(1e-12));
  REQUIRE(nd.span == Catch::Approx((1.0 - 2.0 * p.sigma) * -L).margin(1e-12));

  // Every vertex obeys rho(h) = 2 sqrt(r) cosh(h - waist height), and the
  // waist radius itself is attained.
  const double waist_radius = 2.0 * std::sqrt(r);
  double min_radius = 1e300;
  for (const auto& v : neck.vertices) {
    const double dx = v[0] - nd.center.real();
    const double dy = v[1] - nd.center.imag();
    const double radius = std::hypot(dx, dy);
    const double expect = waist_radius * std::cosh(v[2] - nd.waist_height);
    REQUIRE(radius == Catch::Approx(expect).epsilon(1e-12));
    min_radius = std::min(min_radius, radius);
  }
  // Grid rows straddle the waist, so the sampled minimum sits just above it.
  REQUIRE(min_radius >= waist_radius * (1.0 - 1e-12));
  REQUIRE(min_radius <= waist_radius * 1.02);

  const SurfaceMesh triple = dpms::neck_patch(dpms::build_wei23(), 1, 2, p);
  REQUIRE(triple.diagnostics.necks.at(0).waist_circumference ==
          Catch::Approx(2.0 * dpms::kPi / 3.0).epsilon(1e-14));

  REQUIRE_THROWS_AS(dpms::neck_patch(c, 0, 5, p), std::invalid_argument);
}

TEST_CASE("assembled surfaces meet the stated diagnostics") {
  MeshParams p;
  p.copies = 2;

  struct Case {
    Configuration config;
    long genus;
  };
  const std::vector<Case> cases = {{dpms::build_handles(1), 1},
                                   {dpms::build_wei23(), 4}};

  for (const Case& cs : cases) {
    const SurfaceMesh mesh = dpms::assemble_surface(cs.config, p);
    check_face_indices(mesh);
    const dpms::MeshDiagnostics& d = mesh.diagnostics;
    const double L = std::log(d.r);
    const long N = dpms::level_count(cs.config);

    // Consecutive level heights differ by (1/n_k) log r.
    REQUIRE(static_cast<long>(d.height_gaps.size()) == N);
    for (long k = 0; k < N; ++k) {
      const double gap = L / dpms::count_at(cs.config, k);
      REQUIRE(std::abs(d.height_gaps[static_cast<std::size_t>(k)] - gap) <=
              1e-9);
    }

    // Neck waists and their vertical placement.
    long total_necks = 0;
    for (long k = 0; k < N; ++k) total_necks += dpms::count_at(cs.config, k);
    REQUIRE(static_cast<long>(d.necks.size()) == total_necks);
    for (const dpms::NeckDiagnostics& nd : d.necks) {
      const double n = dpms::count_at(cs.config, nd.level);
      REQUIRE(std::abs(nd.waist_circumference - 2.0 * dpms::kPi / n) <= 1e-12);
      const double above = d.level_heights.at(
          static_cast<std::size_t>(nd.level));
      const double below = above + L / n;
      REQUIRE(nd.waist_height ==
              Catch::Approx(0.5 * (above + below)).margin(1e-9));
      REQUIRE(nd.boundary_mismatch >= 0.0);
      REQUIRE(nd.boundary_mismatch <= p.mismatch_ceiling);
    }

    // Periods: the vertical component is met within one percent, and with a
    // real period the horizontal component of the second period vanishes.
    double target_z = 0.0;
    for (long k = 0; k < N; ++k) {
      target_z += L / dpms::count_at(cs.config, k);
    }
    REQUIRE(d.target_period[2] == Catch::Approx(target_z).margin(1e-12));
    REQUIRE(std::abs(d.achieved_period[2] - target_z) <=
            0.01 * std::abs(target_z));
    REQUIRE(std::hypot(d.achieved_period[0], d.achieved_period[1]) <= 1e-6);

    // Quadrature self-checks.
    REQUIRE(d.loop_closure <= 1e-6);
    REQUIRE(d.tiling_deviation <= 1e-6);
    for (const auto& lv : d.levels) {
      REQUIRE(lv.height_integration_deviation <= 1e-8);
    }

    // Cycle rank of the level/neck incidence graph equals the genus.
    REQUIRE(d.genus_cycle_rank == cs.genus);
    REQUIRE(d.genus_expected == cs.genus);

    // Copies tile along the exact horizontal period (0, 2 pi, 0).
    const std::size_t half = mesh.vertices.size() / 2;
    REQUIRE(mesh.vertices.size() == 2 * half);
    double tile_err = 0.0;
    for (std::size_t v = 0; v < half; ++v) {
      tile_err = std::max(tile_err,
                          std::abs(mesh.vertices[half + v][0] -
                                   mesh.vertices[v][0]));
      tile_err = std::max(tile_err,
                          std::abs(mesh.vertices[half + v][1] -
                                   mesh.vertices[v][1] - 2.0 * dpms::kPi));
      tile_err = std::max(tile_err,
                          std::abs(mesh.vertices[half + v][2] -
                                   mesh.vertices[v][2]));
      REQUIRE(mesh.level_tag[half + v] == mesh.level_tag[v]);
      REQUIRE(mesh.neck_tag[half + v] == mesh.neck_tag[v]);
    }
    REQUIRE(tile_err <= 1e-6);
  }
}

TEST_CASE("assembly requires a balanced configuration") {
  Configuration c = dpms::build_handles(1);
  c.levels[1][0] *= 1.05;
  REQUIRE_THROWS_AS(dpms::assemble_surface(c, coarse_params()),
                    dpms::HypothesisViolation);
}

TEST_CASE("obj export is deterministic and reparsable") {
  const SurfaceMesh empty;
  std::ostringstream empty_out;
  dpms::export_obj(empty, empty_out);
  REQUIRE(empty_out.str() == "# dpms surface mesh\n");

  const SurfaceMesh mesh =
      dpms::assemble_surface(dpms::build_handles(1), coarse_params());
  std::ostringstream first;
  dpms::export_obj(mesh, first);
  const std::string text = first.str();
  REQUIRE(text.rfind("# dpms surface mesh\n", 0) == 0);

  // Parse the stream back into a raw mesh.
  SurfaceMesh parsed;
  std::istringstream in(text);
  std::string token;
  while (in >> token) {
    if (token == "#") {
      std::string rest;
      std::getline(in, rest);
    } else if (token == "v") {
      std::array<double, 3> v{};
      in >> v[0] >> v[1] >> v[2];
      parsed.vertices.push_back(v);
    } else if (token == "f") {
      std::array<int, 3> f{};
      in >> f[0] >> f[1] >> f[2];
      parsed.faces.push_back({f[0] - 1, f[1] - 1, f[2] - 1});
    }
  }
  REQUIRE(parsed.vertices.size() == mesh.vertices.size());
  REQUIRE(parsed.faces.size() == mesh.faces.size());
  for (std::size_t i = 0; i < parsed.vertices.size(); ++i) {
    REQUIRE(parsed.vertices[i] == mesh.vertices[i]);
  }

  // Round trip: re-exporting the parsed mesh reproduces the bytes exactly.
  std::ostringstream second;
  dpms::export_obj(parsed, second);
  REQUIRE(second.str() == text);
}
