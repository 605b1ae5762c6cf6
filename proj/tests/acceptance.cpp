// Acceptance audit for the estimator workbench. Ten numbered checks cover
// the pipeline against an independent dense reference, the analytic bounds
// the estimators are built on, the desk-scale convergence and effectivity
// experiments, and reproducibility. Each check prints exactly one PASS or
// FAIL line; the process exits nonzero if any check fails.
//
// Two checks aggregate over everything else: Galerkin orthogonality is
// tracked for every residual the suite computes, and every adaptive run is
// executed twice to confirm byte-identical CSV output. The checks therefore
// run out of numeric order and the report is sorted afterwards.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dense_oracle.hpp"
#include "sfem/afem.hpp"
#include "sfem/assembly.hpp"
#include "sfem/estimators.hpp"
#include "sfem/fe_space.hpp"
#include "sfem/io.hpp"
#include "sfem/mesh.hpp"
#include "sfem/problems.hpp"
#include "sfem/solve.hpp"

namespace {

using sfem::AfemConfig;
using sfem::ConvergenceRecord;
using sfem::EstimatorResult;
using sfem::FeSpace;
using sfem::Mesh;
using sfem::ProblemSpec;
using sfem::SpMat;
using sfem::Vec;
using sfem::Vec2;

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buffer[256];
  std::snprintf(buffer, sizeof buffer, pattern, a, b, c);
  return buffer;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

Outcome ok(std::string detail) { return {true, std::move(detail)}; }
Outcome bad(std::string detail) { return {false, std::move(detail)}; }

// ----- aggregates fed by every experiment ------------------------------------

double g_worst_orthogonality = 0.0;
std::string g_worst_orthogonality_source = "none";
long g_residual_count = 0;

void note_orthogonality(double value, const std::string& source) {
  if (value > g_worst_orthogonality) {
    g_worst_orthogonality = value;
    g_worst_orthogonality_source = source;
  }
  ++g_residual_count;
}

int g_repeated_runs = 0;
std::vector<std::string> g_nondeterministic;

// Runs the adaptive loop twice with the same config and records whether the
// serialized convergence data came back byte for byte identical. The first
// run carries the caller's observer plus the orthogonality tap.
ConvergenceRecord run_twice(const std::string& label, const ProblemSpec& problem,
                            const AfemConfig& config,
                            const sfem::IterationObserver& observer = {}) {
  std::cerr << "  running " << label << "...\n";
  ConvergenceRecord first = sfem::afem_run(problem, config, [&](const sfem::IterationState& s) {
    note_orthogonality(s.residual_orthogonality, label);
    if (observer) observer(s);
  });
  ConvergenceRecord second = sfem::afem_run(problem, config);
  ++g_repeated_runs;
  if (sfem::convergence_csv(first) != sfem::convergence_csv(second)) {
    g_nondeterministic.push_back(label);
  }
  return first;
}

// ----- shared pipeline helpers ------------------------------------------------

struct PrimalSolve {
  FeSpace space;
  Vec u;
};

// One solve of problem.form on the given mesh, mirroring the adaptive
// loop's treatment of Dirichlet data via a nodal lift.
PrimalSolve solve_primal(const ProblemSpec& problem, const Mesh& mesh, int degree,
                         double tol = 1e-12) {
  PrimalSolve out;
  out.space = sfem::build_space(mesh, degree);
  const SpMat A = sfem::assemble_matrix(out.space, problem.form);
  const Vec b = sfem::assemble_load(out.space, problem.rhs, problem.load_quadrature_degree,
                                    problem.singular_points);
  Vec lift = sfem::interpolate(out.space, problem.dirichlet);
  for (int d : out.space.free_dofs) lift[d] = 0.0;
  const SpMat A_free = sfem::restrict_free(A, out.space);
  const Vec b_free = sfem::restrict_free_rhs(A, b, out.space, lift);
  const Vec x = problem.form.symmetric() ? sfem::solve_spd(A_free, b_free, nullptr, tol)
                                         : sfem::solve_general(A_free, b_free, nullptr, tol);
  out.u = sfem::expand_free(x, out.space, lift);
  return out;
}

// Jacobi pairing estimate against the same-degree space on the uniform red
// refinement, the workhorse configuration of the convergence checks.
EstimatorResult jacobi_red_estimate(const ProblemSpec& problem, const Mesh& mesh,
                                    const FeSpace& space, const Vec& u,
                                    const std::string& source) {
  const auto refined = sfem::uniform_red_refine(mesh);
  const FeSpace fine = sfem::build_space(refined.first, space.degree);
  const sfem::Prolongation P = sfem::build_prolongation_refine(space, fine, refined.second);
  const SpMat A_fine = sfem::assemble_matrix(fine, problem.form);
  const Vec b_fine = sfem::assemble_load(fine, problem.rhs, problem.load_quadrature_degree,
                                         problem.singular_points);
  const sfem::Residual r = sfem::fine_residual(u, A_fine, b_fine, P);
  note_orthogonality(r.orthogonality, source);
  const std::vector<int>& parents = refined.second.parent_of;
  return sfem::jacobi_estimate(
      r, A_fine, [&parents](int e) { return parents[e]; }, mesh.num_elements());
}

double rel_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) return 1.0;
  const double scale =
      std::max({a.size() ? a.cwiseAbs().maxCoeff() : 0.0, b.size() ? b.cwiseAbs().maxCoeff() : 0.0,
                1e-300});
  return a.size() ? (a - b).cwiseAbs().maxCoeff() / scale : 0.0;
}

double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return 1.0;
  const double scale =
      std::max({a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff(), 1e-300});
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

double rel_diff(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Estimator results are compared on the global value and on the indicator
// vector, the latter relative to the global scale.
double estimate_diff(const EstimatorResult& lib, const oracle::Indicators& ref) {
  double d = rel_diff(lib.global, ref.global);
  if (lib.per_element.size() != ref.per_element.size()) return 1.0;
  const double scale = std::max({lib.global, ref.global, 1e-300});
  d = std::max(d, (to_vector(lib.per_element) - to_vector(ref.per_element)).cwiseAbs().maxCoeff() /
                      scale);
  return d;
}

// ----- criterion 1: oracle equivalence ---------------------------------------

double oracle_stage_diff(int degree, std::string& worst_stage) {
  const auto one_xy = [](double, double) { return 1.0; };
  const auto one_pt = [](Vec2) { return 1.0; };
  const sfem::BilinearFormSpec form;  // unit diffusion, no convection

  const Mesh mesh = sfem::make_structured_square(2);
  const FeSpace space = sfem::build_space(mesh, degree);
  const oracle::Space ospace = oracle::build_space(mesh, degree);
  const int nc = mesh.num_elements();

  // The dof numbering contract must agree before value comparisons mean
  // anything.
  if (space.num_dofs != ospace.num_dofs || space.free_dofs != ospace.free_dofs) {
    worst_stage = "dof numbering";
    return 1.0;
  }
  for (int d = 0; d < space.num_dofs; ++d) {
    if (std::abs(space.dof_coords[d][0] - ospace.dof_coords[d][0]) > 1e-12 ||
        std::abs(space.dof_coords[d][1] - ospace.dof_coords[d][1]) > 1e-12) {
      worst_stage = "dof coordinates";
      return 1.0;
    }
  }

  double worst = 0.0;
  const auto stage = [&](const std::string& name, double diff) {
    if (diff > worst) {
      worst = diff;
      worst_stage = name;
    }
  };

  // Assembly.
  const SpMat A = sfem::assemble_matrix(space, form);
  const Vec b = sfem::assemble_load(space, one_pt);
  const oracle::Matrix oK = oracle::stiffness_matrix(ospace);
  const oracle::Vector ob = oracle::load_vector(ospace, one_xy);
  stage("assembly stiffness", rel_diff(Eigen::MatrixXd(A), oK));
  stage("assembly mass",
        rel_diff(Eigen::MatrixXd(sfem::assemble_mass_matrix(space)), oracle::mass_matrix(ospace)));
  stage("assembly load", rel_diff(b, ob));

  // Solve.
  const Vec lift = Vec::Zero(space.num_dofs);
  const SpMat A_free = sfem::restrict_free(A, space);
  const Vec b_free = sfem::restrict_free_rhs(A, b, space, lift);
  const Vec u = sfem::expand_free(sfem::solve_spd(A_free, b_free, nullptr, 1e-13), space, lift);
  const oracle::Vector ou = oracle::solve_poisson(ospace, oK, ob);
  stage("solve", rel_diff(u, ou));

  // Fine residual on the red refinement.
  const auto refined = sfem::uniform_red_refine(mesh);
  const FeSpace fine = sfem::build_space(refined.first, degree);
  const oracle::Space ofine = oracle::build_space(refined.first, degree);
  if (fine.num_dofs != ofine.num_dofs || fine.free_dofs != ofine.free_dofs) {
    worst_stage = "fine dof numbering";
    return 1.0;
  }
  const sfem::Prolongation P = sfem::build_prolongation_refine(space, fine, refined.second);
  const oracle::Matrix oP = oracle::prolongation(ospace, ofine);
  stage("prolongation", rel_diff(Eigen::MatrixXd(P.matrix), oP));

  const SpMat A_fine = sfem::assemble_matrix(fine, form);
  const Vec b_fine = sfem::assemble_load(fine, one_pt);
  const oracle::Matrix oKf = oracle::stiffness_matrix(ofine);
  const oracle::Vector obf = oracle::load_vector(ofine, one_xy);
  const sfem::Residual r = sfem::fine_residual(u, A_fine, b_fine, P);
  note_orthogonality(r.orthogonality, "oracle comparison p=" + std::to_string(degree));
  const oracle::Vector oR = oracle::residual(ofine, oKf, obf, oP * ou);
  stage("fine_residual", rel_diff(r.full, oR));

  const std::vector<int>& parents = refined.second.parent_of;
  const auto parent = [&parents](int e) { return parents[e]; };

  // Jacobi pairing.
  stage("jacobi_estimate", estimate_diff(sfem::jacobi_estimate(r, A_fine, parent, nc),
                                         oracle::jacobi_indicators(ofine, oKf, oR, parents, nc)));

  // Backward Gauss-Seidel sweep and its norms.
  const SpMat A_fine_free = sfem::restrict_free(A_fine, fine);
  const Vec x = sfem::gauss_seidel_smooth(r.free, A_fine_free);
  const oracle::Vector ox = oracle::gauss_seidel(ofine, oKf, oR);
  stage("gauss_seidel_smooth", rel_diff(x, ox));
  stage("smoothed_norm h1",
        estimate_diff(sfem::smoothed_norm_estimate(x, fine, "h1_semi", parent, nc, "gauss_seidel"),
                      oracle::smoothed_norm(ofine, ox, false, parents, nc)));
  stage("smoothed_norm l2",
        estimate_diff(sfem::smoothed_norm_estimate(x, fine, "l2", parent, nc, "gauss_seidel"),
                      oracle::smoothed_norm(ofine, ox, true, parents, nc)));

  // Classical residual estimators.
  stage("residual_estimate_h1", estimate_diff(sfem::residual_estimate_h1(space, u, one_pt),
                                              oracle::residual_indicators(ospace, ou, one_xy,
                                                                          false)));
  stage("residual_estimate_l2", estimate_diff(sfem::residual_estimate_l2(space, u, one_pt),
                                              oracle::residual_indicators(ospace, ou, one_xy,
                                                                          true)));

  // Implicit vertex-patch problems, one degree up.
  stage("implicit_patch_estimate",
        estimate_diff(sfem::implicit_patch_estimate(space, u, form, one_pt, degree + 1),
                      oracle::implicit_patch(ospace, ou, one_xy, degree + 1)));
  return worst;
}

Outcome criterion_oracle() {
  double worst = 0.0;
  std::string where = "none";
  for (int degree : {1, 2}) {
    std::string stage;
    const double diff = oracle_stage_diff(degree, stage);
    if (diff > worst) {
      worst = diff;
      where = "p=" + std::to_string(degree) + " " + stage;
    }
  }
  if (worst > 1e-9) return bad("stage '" + where + "' differs by " + fmt("%.2e", worst));
  return ok("worst stage difference " + fmt("%.2e", worst) + " (" + where + ")");
}

// ----- criterion 3: two-sided estimate on uniform refinements ----------------

Outcome criterion_band() {
  const ProblemSpec problem = sfem::poisson_square_smooth();
  std::vector<double> ratios;
  for (int n : {4, 8, 16, 32}) {
    const Mesh mesh = sfem::make_structured_square(n);
    const PrimalSolve s = solve_primal(problem, mesh, 1);
    const EstimatorResult est =
        jacobi_red_estimate(problem, mesh, s.space, s.u, "uniform band n=" + std::to_string(n));
    const double err = sfem::reference_error(problem, s.space, s.u, "energy");
    ratios.push_back(est.global / err);
  }
  double lo = ratios[0], hi = ratios[0];
  for (double v : ratios) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (lo < 0.2 || hi > 5.0) {
    return bad(fmt("ratio range [%.3f, %.3f] leaves [0.2, 5]", lo, hi));
  }
  if (hi / lo >= 2.5) return bad(fmt("ratio spread %.3f exceeds 2.5", hi / lo));
  return ok(fmt("ratios in [%.3f, %.3f], spread %.3f", lo, hi, hi / lo));
}

// ----- criterion 4: two-level contraction ------------------------------------

Outcome criterion_contraction() {
  const sfem::BilinearFormSpec form;
  std::vector<double> rhos;
  for (int n : {4, 8, 16}) {
    const Mesh mesh = sfem::make_structured_square(n);
    const FeSpace coarse = sfem::build_space(mesh, 1);
    const auto refined = sfem::uniform_red_refine(mesh);
    const FeSpace fine = sfem::build_space(refined.first, 1);
    const sfem::Prolongation P = sfem::build_prolongation_refine(coarse, fine, refined.second);
    const SpMat A_c = sfem::restrict_free(sfem::assemble_matrix(coarse, form), coarse);
    const SpMat A_f = sfem::restrict_free(sfem::assemble_matrix(fine, form), fine);
    const SpMat P_free = sfem::restrict_free_pair(P.matrix, fine, coarse);
    const sfem::ContractionEstimate ce =
        sfem::contraction_factor_estimate(A_f, A_c, P_free, "gauss_seidel", 50, 2024);
    if (!(ce.rho > 0.0 && ce.rho < 1.0)) {
      return bad(fmt("rho %.4f not inside (0, 1)", ce.rho) + " at n=" + std::to_string(n));
    }
    rhos.push_back(ce.rho);
  }
  const double spread = std::abs(rhos[2] - rhos[1]);
  if (spread >= 0.1) return bad(fmt("rho gap %.3f between finest levels exceeds 0.1", spread));
  return ok(fmt("rho = %.3f / %.3f / %.3f across levels", rhos[0], rhos[1], rhos[2]));
}

// ----- criterion 5: adaptive optimal rate on the L-shape ----------------------

struct RateRun {
  std::string label;
  AfemConfig config;
};

Outcome criterion_rates() {
  const ProblemSpec problem = sfem::poisson_lshape();
  std::vector<RateRun> runs;
  {
    AfemConfig c;
    c.theta = 0.5;
    c.degree = 1;
    c.max_dofs = 10000;
    c.estimator = "jacobi";
    c.norm = "energy";
    c.variant = "red";
    // On the finest meshes of these runs the fine residual shrinks toward
    // the coarse solver's stopping residual, which is what the relative
    // orthogonality defect is measured against. One extra digit keeps the
    // defect an order of magnitude under the acceptance bound.
    c.solver_tol = 1e-13;
    runs.push_back({"jacobi fine-coarse", c});
    c.estimator = "gauss_seidel";
    c.norm = "h1_semi";
    runs.push_back({"gauss_seidel fine-coarse", c});
    c.estimator = "jacobi";
    c.norm = "energy";
    c.variant = "degree_raise";
    c.q = 2;
    runs.push_back({"jacobi degree-raise", c});
    c.estimator = "implicit_patch";
    c.norm = "h1_semi";
    c.variant = "red";
    runs.push_back({"implicit_patch", c});
    c.estimator = "residual_h1";
    runs.push_back({"residual_h1", c});
  }

  std::string detail;
  double residual_eff = 0.0;
  std::vector<std::pair<std::string, double>> smoother_effs;
  for (const RateRun& run : runs) {
    const ConvergenceRecord record = run_twice("lshape " + run.label, problem, run.config);
    const double slope = sfem::trailing_slope(record, 5);
    if (slope < -0.6 || slope > -0.4) {
      return bad(run.label + fmt(" slope %.3f outside [-0.6, -0.4]", slope));
    }
    const double eff = record.rows.back().effectivity;
    if (run.label == "residual_h1") {
      residual_eff = eff;
    } else {
      smoother_effs.emplace_back(run.label, eff);
    }
    detail += fmt("%.2f/", slope);
  }
  for (const auto& [label, eff] : smoother_effs) {
    if (!(std::abs(eff - 1.0) < std::abs(residual_eff - 1.0))) {
      return bad(label + fmt(" effectivity %.3f not closer to 1 than residual_h1's %.3f", eff,
                             residual_eff));
    }
  }
  detail.pop_back();
  return ok("slopes " + detail + fmt(", residual_h1 effectivity %.2f", residual_eff));
}

// ----- criterion 6: saturation measurements -----------------------------------

Outcome criterion_saturation() {
  const std::vector<double> smooth =
      sfem::saturation_estimate(sfem::poisson_square_smooth(), 4, 1, "h1_semi");
  const double finest = smooth.back();
  if (finest < 0.4 || finest > 0.6) {
    return bad(fmt("smooth-square saturation %.3f outside [0.4, 0.6]", finest));
  }
  const std::vector<double> lshape =
      sfem::saturation_estimate(sfem::poisson_lshape(), 4, 1, "h1_semi");
  double worst = 0.0;
  for (double g : lshape) worst = std::max(worst, g);
  if (worst >= 1.0) return bad(fmt("l-shape saturation %.3f reaches 1", worst));
  return ok(fmt("smooth finest %.3f, l-shape worst %.3f", finest, worst));
}

// ----- criterion 7: robustness of effectivity in the degree -------------------

Outcome criterion_degree_robustness() {
  const ProblemSpec problem = sfem::poisson_lshape();
  AfemConfig config;
  config.degree = 1;
  config.theta = 0.5;
  config.max_dofs = 5000;
  config.estimator = "jacobi";
  config.norm = "energy";
  config.solver_tol = 1e-13;
  Mesh final_mesh;
  run_twice("lshape mesh sequence for degree sweep", problem, config,
            [&](const sfem::IterationState& s) { final_mesh = s.mesh; });

  std::vector<double> eff_jacobi, eff_residual;
  for (int p = 1; p <= 4; ++p) {
    std::cerr << "  degree sweep p=" << p << "...\n";
    // At p=4 on this mesh the fine residual drops to ~3e-4 in max norm, so a
    // 1e-12 coarse solve shows through as a ~7e-9 relative orthogonality
    // defect. Drive the solve near machine precision to keep the defect the
    // pipeline's own roundoff rather than the solver's stopping criterion.
    const PrimalSolve s = solve_primal(problem, final_mesh, p, 1e-14);
    const double err = sfem::exact_error(problem, s.space, s.u, "h1_semi");
    eff_jacobi.push_back(
        jacobi_red_estimate(problem, final_mesh, s.space, s.u, "degree sweep p=" + std::to_string(p))
            .global /
        err);
    eff_residual.push_back(
        sfem::residual_estimate_h1(s.space, s.u, problem.rhs, problem.singular_points).global /
        err);
  }
  const auto [lo, hi] = std::minmax_element(eff_jacobi.begin(), eff_jacobi.end());
  if (*hi / *lo >= 2.0) {
    return bad(fmt("jacobi effectivity spread %.2f (range [%.2f, %.2f]) reaches 2", *hi / *lo,
                   *lo, *hi));
  }
  for (size_t i = 1; i < eff_residual.size(); ++i) {
    if (!(eff_residual[i] > eff_residual[i - 1])) {
      return bad(fmt("residual effectivity not increasing: %.2f then %.2f", eff_residual[i - 1],
                     eff_residual[i]));
    }
  }
  return ok(fmt("jacobi effectivity in [%.2f, %.2f], residual rising to %.1f", *lo, *hi,
                eff_residual.back()));
}

// ----- criterion 8: L2-driven adaptivity --------------------------------------

Outcome criterion_l2_rate() {
  AfemConfig config;
  config.degree = 1;
  config.theta = 0.5;
  config.max_dofs = 10000;
  config.estimator = "jacobi";
  config.norm = "l2";
  config.solver_tol = 1e-13;
  const ConvergenceRecord record =
      run_twice("lshape jacobi l2", sfem::poisson_lshape(), config);
  const double slope = sfem::trailing_slope(record, 5);
  if (slope < -1.15 || slope > -0.85) {
    return bad(fmt("L2 slope %.3f outside [-1.15, -0.85]", slope));
  }
  return ok(fmt("L2 error slope %.3f", slope));
}

// ----- criterion 9: convection-diffusion interface ----------------------------

Outcome criterion_convection() {
  const ProblemSpec problem = sfem::convection_diffusion_interface();
  std::string detail;
  std::string failures;
  for (int p : {1, 2}) {
    for (const std::string est : {"jacobi", "gauss_seidel"}) {
      AfemConfig config;
      config.degree = p;
      config.theta = 0.5;
      config.max_dofs = 20000;
      config.estimator = est;
      config.norm = "h1_semi";
      long near = 0, marked = 0;
      const auto observer = [&](const sfem::IterationState& s) {
        for (int e : s.marked) {
          const auto& t = s.mesh.elements[e];
          double cx = 0.0, cy = 0.0;
          for (int v : t) {
            cx += s.mesh.vertices[v][0] / 3.0;
            cy += s.mesh.vertices[v][1] / 3.0;
          }
          const double dist = std::min({std::abs(cx - 0.5), 1.0 - cx, 1.0 - cy});
          if (dist <= 2.0 * sfem::element_diameter(s.mesh, e)) ++near;
          ++marked;
        }
      };
      const std::string label = "convection " + est + " p=" + std::to_string(p);
      const ConvergenceRecord record = run_twice(label, problem, config, observer);
      double min_eff = std::numeric_limits<double>::infinity();
      double max_eff = 0.0;
      int out_rows = 0;
      for (const sfem::ConvergenceRow& row : record.rows) {
        min_eff = std::min(min_eff, row.effectivity);
        max_eff = std::max(max_eff, row.effectivity);
        if (row.effectivity < 0.2 || row.effectivity > 5.0) ++out_rows;
      }
      const double fraction = marked ? static_cast<double>(near) / marked : 0.0;
      if (out_rows > 0 || fraction < 0.3) {
        if (!failures.empty()) failures += "; ";
        failures += label + ": " + std::to_string(out_rows) + "/" +
                    std::to_string(record.rows.size()) +
                    fmt(" rows leave [0.2, 5] (effectivity %.2g..%.2g),", min_eff, max_eff) +
                    fmt(" near-layer marking %.0f%%", 100 * fraction);
      } else {
        detail += fmt("%.0f%%/", 100 * fraction);
      }
    }
  }
  if (!failures.empty()) return bad(failures);
  detail.pop_back();
  return ok("near-layer marking " + detail + ", all effectivities in band");
}

}  // namespace

int main() {
  struct Check {
    int id;
    std::string title;
    std::function<Outcome()> run;
  };
  const std::vector<Check> checks = {
      {1, "pipeline matches dense reference on the n=2 square", criterion_oracle},
      {3, "estimator/error ratio banded over uniform refinements", criterion_band},
      {4, "two-level Gauss-Seidel contraction below one", criterion_contraction},
      {5, "adaptive L-shape rate and effectivity ordering", criterion_rates},
      {6, "saturation ratios in the expected range", criterion_saturation},
      {7, "Jacobi effectivity robust in the degree", criterion_degree_robustness},
      {8, "L2-driven adaptivity reaches the optimal rate", criterion_l2_rate},
      {9, "convection-diffusion runs mark the layers", criterion_convection},
  };

  std::map<int, std::pair<std::string, Outcome>> report;
  for (const Check& check : checks) {
    std::cerr << "criterion " << check.id << ": " << check.title << "\n";
    Outcome outcome;
    try {
      outcome = check.run();
    } catch (const std::exception& e) {
      outcome = bad(std::string("exception: ") + e.what());
    }
    report[check.id] = {check.title, outcome};
  }

  // Aggregates over everything the suite ran.
  {
    Outcome orth = g_worst_orthogonality <= 1e-9
                       ? ok(fmt("worst relative orthogonality defect %.2e over",
                                g_worst_orthogonality) +
                            " " + std::to_string(g_residual_count) + " residuals (" +
                            g_worst_orthogonality_source + ")")
                       : bad(fmt("orthogonality defect %.2e exceeds 1e-9",
                                 g_worst_orthogonality) +
                             " (" + g_worst_orthogonality_source + ")");
    report[2] = {"Galerkin orthogonality of every residual", orth};

    Outcome det;
    if (!g_nondeterministic.empty()) {
      std::string who;
      for (const std::string& label : g_nondeterministic) who += label + ", ";
      who.resize(who.size() - 2);
      det = bad("non-identical CSV on repeat: " + who);
    } else {
      det = ok("all " + std::to_string(g_repeated_runs) + " adaptive runs repeated byte-identically");
    }
    report[10] = {"repeated runs produce byte-identical CSV", det};
  }

  int failures = 0;
  for (const auto& [id, entry] : report) {
    const auto& [title, outcome] = entry;
    if (!outcome.pass) ++failures;
    std::printf("%s %2d  %s (%s)\n", outcome.pass ? "PASS" : "FAIL", id, title.c_str(),
                outcome.detail.c_str());
  }
  if (failures) std::printf("%d of %zu criteria failed\n", failures, report.size());
  return failures ? 1 : 0;
}
