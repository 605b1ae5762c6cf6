#pragma once

#include <functional>

#include "sfem/estimators.hpp"
#include "sfem/problems.hpp"

namespace sfem {

struct afem_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Knobs of the adaptive loop. All randomness (contraction probes) is
/// derived from the seed, so a run is a pure function of problem + config.
struct AfemConfig {
  int degree = 1;
  double theta = 0.5;          // Dorfler bulk fraction
  int max_dofs = 10000;
  std::string estimator = "jacobi";
  std::string norm = "h1_semi";
  std::string variant = "red";  // enrichment: "red" or "degree_raise"
  int q = 2;                    // enriched degree for degree_raise / implicit_patch
  double solver_tol = 1e-12;
  bool timing = false;          // record wall time (breaks bit-reproducibility)
};

struct ConvergenceRow {
  int iter = 0;
  int dofs = 0;
  double error = 0.0;
  double estimator = 0.0;
  double effectivity = 0.0;
  double seconds = 0.0;
};

struct ConvergenceRecord {
  std::string problem;
  std::string estimator;
  std::vector<ConvergenceRow> rows;
};

/// Everything one iteration produced, handed to the observer before
/// refinement. References die with the iteration.
struct IterationState {
  int iter;
  const Mesh& mesh;
  const FeSpace& space;
  const Vec& u_full;
  const EstimatorResult& estimate;
  const std::vector<int>& marked;
  double error;
  double residual_orthogonality;  // 0 when the estimator needs no residual
};

using IterationObserver = std::function<void(const IterationState&)>;

/// Minimal-cardinality bulk marking: greedy by descending squared
/// indicator until the marked sum reaches theta times the total. Ties go
/// to the lower element index. Throws if all indicators vanish.
std::vector<int> dorfler_mark(const std::vector<double>& eta2, double theta);

/// Error of a discrete solution against the problem's exact solution in
/// the requested norm ("h1_semi", "l2" or "energy"), by elementwise
/// quadrature with degree elevation next to declared singular points.
double exact_error(const ProblemSpec& problem, const FeSpace& space, const Vec& u_full,
                   const std::string& norm);

/// Error proxy ||u_{h/2} - I u_h|| with u_{h/2} solved on the uniform red
/// refinement, in the requested norm. Used when no exact solution exists.
double reference_error(const ProblemSpec& problem, const FeSpace& space, const Vec& u_full,
                       const std::string& norm, double solver_tol = 1e-12);

/// Saturation ratios gamma_l = e_{l+1} / e_l of exact errors across a
/// uniform refinement hierarchy with `levels` refinements of the problem's
/// initial mesh. Requires an exact solution.
std::vector<double> saturation_estimate(const ProblemSpec& problem, int levels, int degree,
                                        const std::string& norm, double solver_tol = 1e-12);

/// solve -> estimate -> mark -> refine until the dof count exceeds
/// max_dofs. Every iteration is logged, including the one that crosses the
/// threshold. On a numerical failure mid-run the partial record is
/// attached to the thrown afem_abort.
struct afem_abort : std::runtime_error {
  afem_abort(const std::string& what, ConvergenceRecord partial)
      : std::runtime_error(what), record(std::move(partial)) {}
  ConvergenceRecord record;
};

ConvergenceRecord afem_run(const ProblemSpec& problem, const AfemConfig& config,
                           const IterationObserver& observer = {});

/// Least-squares slope of log10(error) against log10(dofs) over the
/// trailing `window` rows.
double trailing_slope(const ConvergenceRecord& record, int window = 5);

}  // namespace sfem
