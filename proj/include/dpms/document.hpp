#pragma once

#include <stdexcept>
#include <string>

#include "json.hpp"

#include "dpms/configuration.hpp"
#include "dpms/forces.hpp"
#include "dpms/jacobian.hpp"
#include "dpms/mesh.hpp"
#include "dpms/solve.hpp"
#include "dpms/weierstrass.hpp"

// Textual configuration documents and structured reports.  A configuration
// document is a JSON object with keys:
//   N       integer, number of levels
//   T       [re, im], the multiplicative period exponent
//   levels  array of N arrays of [re, im] point pairs
//   metadata optional object (name, provenance); ignored on input
// Parsing failures carry the position or key path of the offending entry.

namespace dpms {

using Json = nlohmann::json;

struct DocumentParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Json complex_to_json(Complex z) {
  return Json::array({z.real(), z.imag()});
}

namespace detail {

inline double number_at(const Json& j, const std::string& path) {
  if (!j.is_number()) {
    throw DocumentParseError(path + ": expected a number");
  }
  return j.get<double>();
}

inline Complex point_at_path(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) {
    throw DocumentParseError(path + ": expected a [re, im] pair");
  }
  return {number_at(j[0], path + "[0]"), number_at(j[1], path + "[1]")};
}

}  // namespace detail

inline Json config_to_json(const Configuration& c,
                           const std::string& name = std::string()) {
  Json doc;
  doc["N"] = c.levels.size();
  doc["T"] = complex_to_json(c.period);
  Json levels = Json::array();
  for (const auto& level : c.levels) {
    Json pts = Json::array();
    for (const Complex& p : level) {
      pts.push_back(complex_to_json(p));
    }
    levels.push_back(std::move(pts));
  }
  doc["levels"] = std::move(levels);
  if (!name.empty()) {
    doc["metadata"] = Json{{"name", name}};
  }
  return doc;
}

inline Configuration config_from_json(const Json& doc) {
  if (!doc.is_object()) {
    throw DocumentParseError("top level: expected an object");
  }
  if (!doc.contains("N") || !doc["N"].is_number_integer()) {
    throw DocumentParseError("N: expected an integer");
  }
  if (!doc.contains("T")) {
    throw DocumentParseError("T: missing [re, im] pair");
  }
  if (!doc.contains("levels") || !doc["levels"].is_array()) {
    throw DocumentParseError("levels: expected an array of levels");
  }
  const auto n = doc["N"].get<long long>();
  const Json& levels = doc["levels"];
  if (n < 1 || levels.size() != static_cast<std::size_t>(n)) {
    throw DocumentParseError("N: does not match the number of levels");
  }

  Configuration c;
  c.period = detail::point_at_path(doc["T"], "T");
  c.levels.reserve(levels.size());
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const std::string level_path = "levels[" + std::to_string(k) + "]";
    const Json& level = levels[k];
    if (!level.is_array() || level.empty()) {
      throw DocumentParseError(level_path +
                               ": expected a nonempty array of points");
    }
    std::vector<Complex> pts;
    pts.reserve(level.size());
    for (std::size_t i = 0; i < level.size(); ++i) {
      pts.push_back(detail::point_at_path(
          level[i], level_path + "[" + std::to_string(i) + "]"));
    }
    c.levels.push_back(std::move(pts));
  }
  return c;
}

// Parse free text; syntax errors keep the line/column report of the JSON
// parser, structural errors keep the key path.
inline Configuration parse_config_text(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw DocumentParseError(e.what());
  }
  return config_from_json(doc);
}

inline std::string document_text(const Json& doc) { return doc.dump(2) + "\n"; }

inline Json forces_to_json(const Configuration& c, const ForceReport& report) {
  Json doc;
  doc["genus"] = genus(c);
  doc["residual_norm"] = report.residual_norm;
  doc["total"] = complex_to_json(report.total);
  Json levels = Json::array();
  for (std::size_t k = 0; k < c.levels.size(); ++k) {
    Json entry;
    entry["level"] = k;
    Json pts = Json::array();
    Json force = Json::array();
    Json plus = Json::array();
    Json minus = Json::array();
    for (std::size_t i = 0; i < c.levels[k].size(); ++i) {
      pts.push_back(complex_to_json(c.levels[k][i]));
      force.push_back(complex_to_json(report.force[k][i]));
      plus.push_back(complex_to_json(report.plus[k][i]));
      minus.push_back(complex_to_json(report.minus[k][i]));
    }
    entry["points"] = std::move(pts);
    entry["force"] = std::move(force);
    entry["force_plus"] = std::move(plus);
    entry["force_minus"] = std::move(minus);
    levels.push_back(std::move(entry));
  }
  doc["levels"] = std::move(levels);
  return doc;
}

inline Json jacobian_to_json(const JacobianReport& report) {
  Json doc;
  doc["m"] = report.m;
  doc["rank"] = report.rank;
  doc["nondegenerate"] = report.nondegenerate;
  doc["tolerance"] = report.tolerance;
  doc["spectral_gap"] = spectral_gap(report);
  Json sv = Json::array();
  for (double s : report.singular_values) {
    sv.push_back(s);
  }
  doc["singular_values"] = std::move(sv);
  return doc;
}

inline Json solve_to_json(const SolveOutcome& outcome) {
  Json doc;
  doc["converged"] = outcome.converged;
  doc["iterations"] = outcome.iterations;
  doc["residual"] = outcome.residual;
  doc["message"] = outcome.message;
  doc["configuration"] = config_to_json(outcome.config);
  doc["fourth_roots_class"] = is_fourth_roots_class(outcome.config);
  doc["puncture_collapse"] = is_puncture_collapse(outcome.config);
  return doc;
}

inline Json limit_to_json(const LimitVerification& v) {
  Json doc;
  doc["pass"] = v.pass;
  doc["tolerance"] = v.tolerance;
  doc["max_height_differences"] = v.max_f1;
  doc["max_weight_differences"] = v.max_f2;
  doc["max_log_periods"] = v.max_f3;
  doc["max_residue_periods"] = v.max_f4;
  doc["max_flux_deviation"] = v.max_f5;
  doc["oracle_deviation"] = v.oracle_deviation;
  doc["max_deviation"] = v.max_deviation;
  return doc;
}

inline Json mesh_to_json(const SurfaceMesh& mesh) {
  const MeshDiagnostics& d = mesh.diagnostics;
  Json doc;
  doc["vertices"] = mesh.vertices.size();
  doc["faces"] = mesh.faces.size();
  doc["r"] = d.r;
  doc["level_heights"] = d.level_heights;
  doc["height_gaps"] = d.height_gaps;
  Json necks = Json::array();
  for (const NeckDiagnostics& n : d.necks) {
    Json entry;
    entry["level"] = n.level;
    entry["point"] = n.point;
    entry["waist_circumference"] = n.waist_circumference;
    entry["waist_height"] = n.waist_height;
    entry["span"] = n.span;
    entry["boundary_mismatch"] = n.boundary_mismatch;
    entry["center"] = complex_to_json(n.center);
    necks.push_back(std::move(entry));
  }
  doc["necks"] = std::move(necks);
  doc["target_period"] = d.target_period;
  doc["achieved_period"] = d.achieved_period;
  doc["boundary_mismatch"] = d.boundary_mismatch;
  doc["loop_closure"] = d.loop_closure;
  doc["tiling_deviation"] = d.tiling_deviation;
  doc["genus_cycle_rank"] = d.genus_cycle_rank;
  doc["genus_expected"] = d.genus_expected;
  return doc;
}

}  // namespace dpms
