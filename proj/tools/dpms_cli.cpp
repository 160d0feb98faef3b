#include <cstdint>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"

#include "dpms/catalog.hpp"
#include "dpms/document.hpp"

// Command line front end.  Every subcommand reads configuration documents
// (JSON, see document.hpp) and writes one structured report to stdout.
// Nothing is printed on stdout until the whole computation succeeded.
// Exit codes: 0 success, 2 parse error (document or usage), 3 domain error,
// 4 convergence failure, 5 I/O failure, 6 hypothesis violation.

namespace {

using namespace dpms;

std::string read_input(const std::string& path) {
  std::ostringstream buf;
  if (path == "-") {
    buf << std::cin.rdbuf();
    return buf.str();
  }
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  buf << in.rdbuf();
  if (in.bad()) {
    throw std::runtime_error("cannot read " + path);
  }
  return buf.str();
}

Configuration load_config(const std::string& path) {
  Configuration c = parse_config_text(read_input(path));
  validate(c);
  return c;
}

void emit(const Json& doc) { std::cout << document_text(doc); }

int cmd_forces(const std::string& input) {
  const Configuration c = load_config(input);
  emit(forces_to_json(c, force_report(c)));
  return 0;
}

int cmd_solve(const std::string& input, double tol, int max_iter,
              double perturb, std::uint64_t seed) {
  Configuration c = load_config(input);
  if (perturb != 0.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (auto& level : c.levels) {
      for (Complex& p : level) {
        p += perturb * Complex(dist(rng), dist(rng));
      }
    }
  }
  const SolveOutcome outcome = solve_balance(c, tol, max_iter);
  emit(solve_to_json(outcome));
  return outcome.converged ? 0 : 4;
}

int cmd_rank(const std::string& input, double tol) {
  const Configuration c = load_config(input);
  emit(jacobian_to_json(jacobian_report(c, tol)));
  return 0;
}

int cmd_catalog(const std::string& name, int arg) {
  Configuration c;
  std::string label;
  if (name == "handles") {
    if (arg < 1) {
      throw std::invalid_argument("handles requires a positive handle count");
    }
    c = build_handles(arg);
    label = "handles(" + std::to_string(arg) + ")";
  } else if (name == "alternating") {
    if (arg < 2) {
      throw std::invalid_argument(
          "alternating requires an even level count of at least 2");
    }
    c = build_alternating(arg);
    label = "alternating(" + std::to_string(arg) + ")";
  } else {
    if (arg != 0) {
      throw std::invalid_argument("wei23 takes no size argument");
    }
    c = build_wei23();
    label = "wei23";
  }
  emit(config_to_json(c, label));
  return 0;
}

int cmd_combine(const std::string& in1, const std::string& in2, double tol) {
  const Configuration a = load_config(in1);
  const Configuration b = load_config(in2);
  emit(config_to_json(combine(a, b, tol), "combine"));
  return 0;
}

int cmd_verify_limit(const std::string& input, double tol) {
  const Configuration c = load_config(input);
  emit(limit_to_json(verify_parameters(x_from_config(c), tol)));
  return 0;
}

int cmd_mesh(const std::string& input, double t, double sigma, int copies,
             const std::string& out) {
  const Configuration c = load_config(input);
  MeshParams params;
  params.t = t;
  params.sigma = sigma;
  params.copies = copies;
  validate_mesh_params(params);
  const SurfaceMesh mesh = assemble_surface(c, params);
  export_obj_file(mesh, out);
  emit(mesh_to_json(mesh));
  return 0;
}

int fail(int code, const std::string& message) {
  std::cerr << "error: " << message << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"balance configurations of doubly periodic minimal surfaces"};
  app.require_subcommand(1);
  int code = 0;

  auto* forces = app.add_subcommand(
      "forces", "evaluate forces, residual norm, and genus");
  std::string forces_in{"-"};
  forces->add_option("input", forces_in,
                     "configuration document path, - for stdin");
  forces->callback([&] { code = cmd_forces(forces_in); });

  auto* solve = app.add_subcommand("solve", "run the balance solver");
  std::string solve_in{"-"};
  double solve_tol = 1e-12;
  int solve_iters = 50;
  double solve_perturb = 0.0;
  std::uint64_t solve_seed = 1;
  solve->add_option("input", solve_in,
                    "configuration document path, - for stdin");
  solve->add_option("--tol", solve_tol, "residual norm target");
  solve->add_option("--max-iter", solve_iters, "iteration budget");
  solve->add_option("--seed-perturb", solve_perturb,
                    "perturb the input points by this amplitude before "
                    "solving (deterministic, see --seed)");
  solve->add_option("--seed", solve_seed, "random seed for --seed-perturb");
  solve->callback([&] {
    code = cmd_solve(solve_in, solve_tol, solve_iters, solve_perturb,
                     solve_seed);
  });

  auto* rank = app.add_subcommand(
      "rank", "numerical rank and singular values of the force derivative");
  std::string rank_in{"-"};
  double rank_tol = 1e-8;
  rank->add_option("input", rank_in,
                   "configuration document path, - for stdin");
  rank->add_option("--tol", rank_tol, "relative singular value cutoff");
  rank->callback([&] { code = cmd_rank(rank_in, rank_tol); });

  auto* catalog = app.add_subcommand(
      "catalog", "emit a built-in balanced configuration");
  std::string catalog_name;
  int catalog_arg = 0;
  catalog->add_option("name", catalog_name, "handles, alternating, or wei23")
      ->required()
      ->check(CLI::IsMember({"handles", "alternating", "wei23"}));
  catalog->add_option("size", catalog_arg,
                      "handle count or level count (not used by wei23)");
  catalog->callback([&] { code = cmd_catalog(catalog_name, catalog_arg); });

  auto* comb = app.add_subcommand(
      "combine", "concatenate two balanced chains sharing first level {1}");
  std::string comb_in1;
  std::string comb_in2;
  double comb_tol = 1e-9;
  comb->add_option("first", comb_in1, "first configuration document")
      ->required();
  comb->add_option("second", comb_in2, "second configuration document")
      ->required();
  comb->add_option("--tol", comb_tol, "hypothesis check tolerance");
  comb->callback([&] { code = cmd_combine(comb_in1, comb_in2, comb_tol); });

  auto* verify = app.add_subcommand(
      "verify-limit", "check the noded-limit identities of a configuration");
  std::string verify_in{"-"};
  double verify_tol = 1e-8;
  verify->add_option("input", verify_in,
                     "configuration document path, - for stdin");
  verify->add_option("--tol", verify_tol, "component tolerance");
  verify->callback([&] { code = cmd_verify_limit(verify_in, verify_tol); });

  auto* mesh = app.add_subcommand(
      "mesh", "triangulate the surface near the limit and write an OBJ file");
  std::string mesh_in{"-"};
  std::string mesh_out;
  double mesh_t = 0.25;
  double mesh_sigma = 0.3;
  int mesh_copies = 1;
  mesh->add_option("input", mesh_in,
                   "configuration document path, - for stdin");
  mesh->add_option("--t", mesh_t, "opening parameter, r = exp(-1/t^2)");
  mesh->add_option("--sigma", mesh_sigma, "neck cutoff exponent in (0, 1/2)");
  mesh->add_option("--copies", mesh_copies,
                   "number of horizontal period translates");
  mesh->add_option("--out", mesh_out, "OBJ output path")->required();
  mesh->callback([&] {
    code = cmd_mesh(mesh_in, mesh_t, mesh_sigma, mesh_copies, mesh_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int cli_code = app.exit(e);
    return cli_code == 0 ? 0 : 2;
  } catch (const DocumentParseError& e) {
    return fail(2, e.what());
  } catch (const DegenerateConfiguration& e) {
    return fail(3, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(3, e.what());
  } catch (const NumericalFailure& e) {
    return fail(4, e.what());
  } catch (const HypothesisViolation& e) {
    return fail(6, e.what());
  } catch (const std::runtime_error& e) {
    return fail(5, e.what());
  }
  return code;
}
