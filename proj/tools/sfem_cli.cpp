// Command-line front end: runs configured experiments, compares estimators,
// dumps meshes and matrices, and self-checks the library invariants.
//
// Exit codes: 0 success, 1 configuration or input problem, 2 numerical abort.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sfem/afem.hpp"
#include "sfem/assembly.hpp"
#include "sfem/config.hpp"
#include "sfem/estimators.hpp"
#include "sfem/fe_space.hpp"
#include "sfem/io.hpp"
#include "sfem/mesh.hpp"
#include "sfem/problems.hpp"
#include "sfem/solve.hpp"

namespace {

using namespace sfem;

void require(bool condition, const std::string& what) {
  if (!condition) throw std::runtime_error(what);
}

int do_run(const std::string& config_path) {
  const RunConfig config = parse_config(read_text_file(config_path));
  const ExperimentResult result = run_experiment(config);
  const ConvergenceRow& last = result.record.rows.back();
  std::printf("wrote %s (%zu iterations)\n", (result.directory / "convergence.csv").c_str(),
              result.record.rows.size());
  std::printf("final: dofs=%d error=%.6g estimator=%.6g effectivity=%.6g slope=%.3f\n",
              last.dofs, last.error, last.estimator, last.effectivity, result.slope);
  return 0;
}

int do_compare(const std::string& config_path, const std::vector<std::string>& estimators) {
  const RunConfig config = parse_config(read_text_file(config_path));
  const CompareResult result = compare_estimators(config, estimators);
  std::printf("wrote %s and %s\n", (result.directory / "compare.csv").c_str(),
              (result.directory / "compare.svg").c_str());
  for (size_t i = 0; i < estimators.size(); ++i) {
    const ConvergenceRow& last = result.records[i].rows.back();
    std::printf("%-16s final dofs=%d error=%.6g effectivity=%.6g\n", estimators[i].c_str(),
                last.dofs, last.error, last.effectivity);
  }
  return 0;
}

int do_mesh_dump(const std::string& config_path) {
  const RunConfig config = parse_config(read_text_file(config_path));
  const ProblemSpec problem = problem_by_name(config.problem);
  const Mesh mesh = problem.make_mesh();

  const std::filesystem::path dir(config.output);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw io_error("cannot create output directory '" + dir.string() + "'");

  write_text_file(dir / "mesh.node", mesh_to_node(mesh));
  write_text_file(dir / "mesh.ele", mesh_to_ele(mesh));
  write_text_file(dir / "mesh.svg", mesh_svg(mesh));

  const FeSpace space = build_space(mesh, config.degree);
  const SpMat A = assemble_matrix(space, problem.form);
  write_text_file(dir / "system.mtx", matrix_market(A));

  std::printf("wrote mesh.node, mesh.ele, mesh.svg, system.mtx to %s\n", dir.c_str());
  std::printf("vertices=%d elements=%d dofs=%d\n", mesh.num_vertices(), mesh.num_elements(),
              space.num_dofs);
  return 0;
}

// Fast structural self-checks, one line per invariant. Returns the number of
// failures.
int do_check() {
  int failures = 0;
  const auto check = [&](const char* name, const std::function<void()>& body) {
    try {
      body();
      std::printf("ok   %s\n", name);
    } catch (const std::exception& e) {
      ++failures;
      std::printf("FAIL %s: %s\n", name, e.what());
    }
  };

  check("mesh construction and refinement stay valid", [] {
    const Mesh square = make_structured_square(4);
    require(validate(square).empty(), "structured square invalid");
    const Mesh lshape = make_lshape();
    require(validate(lshape).empty(), "lshape invalid");
    const auto [red, map] = uniform_red_refine(lshape);
    require(validate(red).empty(), "red refinement invalid");
    require(red.num_elements() == 4 * lshape.num_elements(), "red refinement count");
    const Mesh bisected = bisect_marked(lshape, {0});
    require(validate(bisected).empty(), "bisection closure invalid");
  });

  check("lagrange bases form a partition of unity", [] {
    for (int p = 1; p <= 4; ++p) {
      const LagrangeBasis& basis = LagrangeBasis::get(p);
      std::vector<double> values(basis.size());
      for (const Vec2 x : {Vec2{0.2, 0.3}, Vec2{0.0, 0.5}, Vec2{0.31, 0.11}}) {
        basis.eval(x, values);
        double sum = 0.0;
        for (double v : values) sum += v;
        require(std::abs(sum - 1.0) < 1e-12, "partition of unity violated");
      }
    }
  });

  check("coarse matrix is the Galerkin restriction of the fine one", [] {
    const Mesh coarse = make_structured_square(2);
    const auto [fine, map] = uniform_red_refine(coarse);
    const FeSpace Vc = build_space(coarse, 1);
    const FeSpace Vf = build_space(fine, 1);
    const Prolongation P = build_prolongation_refine(Vc, Vf, map);
    const BilinearFormSpec laplace;
    const SpMat Ac = assemble_matrix(Vc, laplace);
    const SpMat Af = assemble_matrix(Vf, laplace);
    const Eigen::SparseMatrix<double> Pc(P.matrix);
    const Eigen::SparseMatrix<double> Afc(Af);
    const Eigen::SparseMatrix<double> inherited = Pc.transpose() * Afc * Pc;
    double diff = 0.0;
    for (int k = 0; k < inherited.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(inherited, k); it; ++it) {
        diff = std::max(diff, std::abs(it.value() - Ac.coeff(it.row(), it.col())));
      }
    }
    require(diff <= 1e-10, "inherited matrix deviates by " + std::to_string(diff));
  });

  check("enriched residual is orthogonal to the coarse space", [] {
    const ProblemSpec problem = poisson_square_smooth();
    const Mesh mesh = problem.make_mesh();
    const FeSpace space = build_space(mesh, 1);
    const SpMat A = assemble_matrix(space, problem.form);
    const Vec b = assemble_load(space, problem.rhs, problem.load_quadrature_degree);
    const SpMat A_free = restrict_free(A, space);
    const Vec lift = Vec::Zero(space.num_dofs);
    const Vec b_free = restrict_free_rhs(A, b, space, lift);
    const Vec u_free = solve_spd(A_free, b_free);
    const Vec u_full = expand_free(u_free, space, lift);
    const auto [fine_mesh, map] = uniform_red_refine(mesh);
    const FeSpace fine = build_space(fine_mesh, 1);
    const Prolongation P = build_prolongation_refine(space, fine, map);
    const SpMat A_fine = assemble_matrix(fine, problem.form);
    const Vec b_fine = assemble_load(fine, problem.rhs, problem.load_quadrature_degree);
    const Residual res = fine_residual(u_full, A_fine, b_fine, P);
    require(res.orthogonality <= 1e-9,
            "orthogonality " + std::to_string(res.orthogonality));
  });

  check("dorfler marking is minimal and sufficient", [] {
    const std::vector<double> eta2 = {9.0, 4.0, 1.0, 1.0, 1.0, 0.0};
    const std::vector<int> half = dorfler_mark(eta2, 0.5);
    require(half == std::vector<int>{0}, "theta=0.5 should mark only the largest");
    const std::vector<int> all = dorfler_mark(eta2, 1.0);
    require(all == std::vector<int>({0, 1, 2, 3, 4}), "theta=1 should mark all positive");
  });

  check("identical configs produce identical output", [] {
    RunConfig config = parse_config("problem = poisson_lshape\nmax_dofs = 200\n");
    const ProblemSpec problem = problem_by_name(config.problem);
    const ConvergenceRecord a = afem_run(problem, afem_config(config));
    const ConvergenceRecord b = afem_run(problem, afem_config(config));
    require(convergence_csv(a) == convergence_csv(b), "two runs differ");
  });

  check("config text round-trips through parse and serialize", [] {
    const std::string text =
        "problem = convection_diffusion_interface\nestimator = gauss_seidel\nnorm = l2\n"
        "theta = 0.25\nmax_dofs = 1234\nseed = 7\n";
    const RunConfig once = parse_config(text);
    const RunConfig twice = parse_config(serialize_config(once));
    require(serialize_config(once) == serialize_config(twice), "round trip changed the config");
  });

  check("mesh text files round-trip", [] {
    const Mesh mesh = make_lshape();
    const Mesh back = mesh_from_node_ele(mesh_to_node(mesh), mesh_to_ele(mesh));
    require(back.vertices == mesh.vertices, "vertices changed");
    require(back.elements == mesh.elements, "elements changed");
    require(back.boundary_edges.size() == mesh.boundary_edges.size(), "boundary changed");
  });

  if (failures > 0) std::printf("%d check(s) failed\n", failures);
  return failures;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive finite element workbench with smoother-type error estimators"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> estimators;

  CLI::App* run = app.add_subcommand("run", "run one adaptive experiment");
  run->add_option("config", config_path, "key=value config file")->required();

  CLI::App* compare = app.add_subcommand("compare", "run several estimators on one problem");
  compare->add_option("config", config_path, "key=value config file")->required();
  compare->add_option("--estimators", estimators, "comma-separated estimator list")
      ->required()
      ->delimiter(',');

  CLI::App* mesh_dump = app.add_subcommand("mesh-dump", "write the initial mesh and system");
  mesh_dump->add_option("config", config_path, "key=value config file")->required();

  app.add_subcommand("check", "run the library invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand("run")) return do_run(config_path);
    if (app.got_subcommand("compare")) return do_compare(config_path, estimators);
    if (app.got_subcommand("mesh-dump")) return do_mesh_dump(config_path);
    return do_check() == 0 ? 0 : 2;
  } catch (const config_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const io_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "abort: %s\n", e.what());
    return 2;
  }
}
