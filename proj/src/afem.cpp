#include "sfem/afem.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace sfem {

namespace {

using Clock = std::chrono::steady_clock;

double integrate_error(const ProblemSpec& problem, const FeSpace& space, const Vec& u_full,
                       const std::string& norm) {
  const Mesh& mesh = *space.mesh;
  const int p = space.degree;
  const LagrangeBasis& basis = LagrangeBasis::get(p);
  const int nloc = space.dofs_per_element;
  std::vector<double> values(nloc);
  std::vector<std::array<double, 2>> grads(nloc);

  double total = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const bool elevated = !problem.singular_points.empty() &&
                          touches_point(mesh, e, problem.singular_points);
    const QuadratureRule& quad = triangle_quadrature(
        elevated ? elevated_quadrature_degree(p) : load_quadrature_degree(p));
    const ElementMap map = element_map(mesh, e);
    const auto dofs = space.element_dofs(e);
    const double alpha_c =
        problem.form.centroid_diffusion ? problem.form.diffusion(element_centroid(mesh, e)) : 0.0;
    for (size_t qp = 0; qp < quad.points.size(); ++qp) {
      const Vec2 x = map.to_physical(quad.points[qp]);
      const double w = quad.weights[qp] * map.det;
      double term = 0.0;
      if (norm == "l2") {
        basis.eval(quad.points[qp], values);
        double uh = 0.0;
        for (int i = 0; i < nloc; ++i) uh += u_full[dofs[i]] * values[i];
        const double diff = problem.exact(x) - uh;
        term = diff * diff;
      } else {
        basis.eval_grad(quad.points[qp], grads);
        double gx = 0.0, gy = 0.0;
        for (int i = 0; i < nloc; ++i) {
          const double u = u_full[dofs[i]];
          gx += u * (map.inv[0] * grads[i][0] + map.inv[2] * grads[i][1]);
          gy += u * (map.inv[1] * grads[i][0] + map.inv[3] * grads[i][1]);
        }
        const Vec2 g = problem.exact_grad(x);
        const double dx = g[0] - gx, dy = g[1] - gy;
        term = dx * dx + dy * dy;
        if (norm == "energy") {
          term *= problem.form.centroid_diffusion ? alpha_c : problem.form.diffusion(x);
        }
      }
      if (!std::isfinite(term)) {
        throw afem_error("exact_error: non-finite integrand in element " + std::to_string(e));
      }
      total += w * term;
    }
  }
  return std::sqrt(total);
}

}  // namespace

std::vector<int> dorfler_mark(const std::vector<double>& eta2, double theta) {
  if (!(theta > 0.0) || theta > 1.0) {
    throw afem_error("dorfler_mark: theta must lie in (0, 1]");
  }
  double total = 0.0;
  for (double v : eta2) {
    if (!(v >= 0.0)) throw afem_error("dorfler_mark: negative indicator");
    total += v;
  }
  if (total == 0.0) {
    throw afem_error("dorfler_mark: all indicators vanish; nothing drives refinement");
  }

  std::vector<int> order(eta2.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&eta2](int a, int b) {
    if (eta2[a] != eta2[b]) return eta2[a] > eta2[b];
    return a < b;
  });

  std::vector<int> marked;
  double acc = 0.0;
  for (int e : order) {
    if (acc >= theta * total || eta2[e] == 0.0) break;
    marked.push_back(e);
    acc += eta2[e];
  }
  std::sort(marked.begin(), marked.end());
  return marked;
}

double exact_error(const ProblemSpec& problem, const FeSpace& space, const Vec& u_full,
                   const std::string& norm) {
  if (!problem.has_exact()) {
    throw afem_error("exact_error: problem has no exact solution");
  }
  if (norm != "h1_semi" && norm != "l2" && norm != "energy") {
    throw afem_error("exact_error: unsupported norm " + norm);
  }
  return integrate_error(problem, space, u_full, norm);
}

namespace {

// Assemble and solve the problem on one mesh. Returns the full solution
// vector including boundary values.
struct Discretization {
  FeSpace space;
  SpMat A_full;
  Vec b_full;
  Vec u_full;
  Vec lift;
};

Discretization solve_on_mesh(const ProblemSpec& problem, const Mesh& mesh, int degree,
                             double tol) {
  Discretization d;
  d.space = build_space(mesh, degree);
  d.A_full = assemble_matrix(d.space, problem.form);
  d.b_full = assemble_load(d.space, problem.rhs, problem.load_quadrature_degree,
                           problem.singular_points);
  d.lift = interpolate(d.space, problem.dirichlet);
  for (int dof = 0; dof < d.space.num_dofs; ++dof) {
    if (!d.space.is_boundary[dof]) d.lift[dof] = 0.0;
  }
  const SpMat A_free = restrict_free(d.A_full, d.space);
  const Vec b_free = restrict_free_rhs(d.A_full, d.b_full, d.space, d.lift);
  const Vec x = problem.form.symmetric() ? solve_spd(A_free, b_free, nullptr, tol)
                                         : solve_general(A_free, b_free, nullptr, tol);
  d.u_full = expand_free(x, d.space, d.lift);
  return d;
}

}  // namespace

double reference_error(const ProblemSpec& problem, const FeSpace& space, const Vec& u_full,
                       const std::string& norm, double solver_tol) {
  const auto [fine_mesh, map] = uniform_red_refine(*space.mesh);
  if (problem.check_mesh) problem.check_mesh(fine_mesh);
  const Discretization fine = solve_on_mesh(problem, fine_mesh, space.degree, solver_tol);
  const Prolongation P = build_prolongation_refine(space, fine.space, map);
  const Vec diff = P.matrix * u_full - fine.u_full;

  SpMat K;
  if (norm == "h1_semi") {
    K = assemble_h1_seminorm_matrix(fine.space);
  } else if (norm == "l2") {
    K = assemble_mass_matrix(fine.space);
  } else if (norm == "energy") {
    if (!problem.form.symmetric()) {
      throw afem_error("reference_error: energy norm undefined for nonsymmetric forms");
    }
    K = fine.A_full;
  } else {
    throw afem_error("reference_error: unsupported norm " + norm);
  }
  return weighted_norm(diff, K);
}

std::vector<double> saturation_estimate(const ProblemSpec& problem, int levels, int degree,
                                        const std::string& norm, double solver_tol) {
  if (!problem.has_exact()) {
    throw afem_error("saturation_estimate: problem has no exact solution");
  }
  if (levels < 1) throw afem_error("saturation_estimate: need at least one level");

  std::vector<double> errors;
  Mesh mesh = problem.make_mesh();
  for (int l = 0; l <= levels; ++l) {
    const Discretization d = solve_on_mesh(problem, mesh, degree, solver_tol);
    errors.push_back(exact_error(problem, d.space, d.u_full, norm));
    if (l < levels) mesh = uniform_red_refine(mesh).first;
  }
  std::vector<double> gamma(levels);
  for (int l = 0; l < levels; ++l) {
    gamma[l] = errors[l] > 0.0 ? errors[l + 1] / errors[l]
                               : std::numeric_limits<double>::quiet_NaN();
  }
  return gamma;
}

namespace {

struct EstimateOutcome {
  EstimatorResult result;
  double orthogonality = 0.0;
};

EstimateOutcome run_estimator(const ProblemSpec& problem, const AfemConfig& config,
                              const Discretization& d) {
  EstimateOutcome out;
  const std::string& kind = config.estimator;

  if (kind == "residual_h1") {
    out.result = residual_estimate_h1(d.space, d.u_full, problem.rhs, problem.singular_points);
    return out;
  }
  if (kind == "residual_l2") {
    out.result = residual_estimate_l2(d.space, d.u_full, problem.rhs, problem.singular_points);
    return out;
  }
  if (kind == "implicit_patch") {
    out.result =
        implicit_patch_estimate(d.space, d.u_full, problem.form, problem.rhs, config.q,
                                problem.load_quadrature_degree);
    return out;
  }

  if (kind != "jacobi" && kind != "gauss_seidel") {
    throw afem_error("afem_run: unknown estimator " + kind);
  }

  if (config.variant == "degree_raise") {
    Residual residual;
    out.result = low_high_degree_estimate(d.space, d.u_full, problem.form, problem.rhs,
                                          config.q, kind, config.norm, &residual,
                                          problem.load_quadrature_degree);
    out.orthogonality = residual.orthogonality;
    return out;
  }
  if (config.variant != "red") {
    throw afem_error("afem_run: unknown variant " + config.variant);
  }

  const auto [fine_mesh, map] = uniform_red_refine(*d.space.mesh);
  if (problem.check_mesh) problem.check_mesh(fine_mesh);
  const FeSpace fine = build_space(fine_mesh, config.degree);
  const Prolongation P = build_prolongation_refine(d.space, fine, map);
  const SpMat A_fine = assemble_matrix(fine, problem.form);
  const Vec b_fine = assemble_load(fine, problem.rhs, problem.load_quadrature_degree,
                                   problem.singular_points);
  const Residual r = fine_residual(d.u_full, A_fine, b_fine, P);
  out.orthogonality = r.orthogonality;

  const ParentOf parent = [&map](int e) { return map.parent_of[e]; };
  const int n_coarse = d.space.mesh->num_elements();
  if (kind == "jacobi" && config.norm == "energy") {
    out.result = jacobi_estimate(r, A_fine, parent, n_coarse);
    return out;
  }
  const SpMat A_free = restrict_free(A_fine, fine);
  Vec x;
  if (kind == "jacobi") {
    const Vec diag = A_free.diagonal();
    for (int i = 0; i < diag.size(); ++i) {
      if (diag[i] == 0.0) throw estimator_error("jacobi smoother: zero diagonal entry");
    }
    x = r.free.cwiseQuotient(diag);
  } else {
    x = gauss_seidel_smooth(r.free, A_free);
  }
  out.result = smoothed_norm_estimate(x, fine, config.norm, parent, n_coarse, kind);
  return out;
}

}  // namespace

ConvergenceRecord afem_run(const ProblemSpec& problem, const AfemConfig& config,
                           const IterationObserver& observer) {
  ConvergenceRecord record;
  record.problem = problem.name;
  record.estimator = config.estimator;

  Mesh mesh = problem.make_mesh();
  if (problem.check_mesh) problem.check_mesh(mesh);
  const std::string error_norm = config.norm == "energy" ? "energy" : config.norm;

  int prev_dofs = 0;
  for (int iter = 0;; ++iter) {
    const auto started = Clock::now();
    try {
      const Discretization d = solve_on_mesh(problem, mesh, config.degree, config.solver_tol);
      if (d.space.num_dofs <= prev_dofs) {
        throw afem_error("afem_run: dof count failed to increase");
      }
      prev_dofs = d.space.num_dofs;

      const EstimateOutcome est = run_estimator(problem, config, d);
      const double error =
          problem.has_exact()
              ? exact_error(problem, d.space, d.u_full, error_norm)
              : reference_error(problem, d.space, d.u_full, error_norm, config.solver_tol);

      ConvergenceRow row;
      row.iter = iter;
      row.dofs = d.space.num_dofs;
      row.error = error;
      row.estimator = est.result.global;
      row.effectivity = error > 0.0 ? est.result.global / error
                                    : std::numeric_limits<double>::quiet_NaN();
      row.seconds =
          config.timing ? std::chrono::duration<double>(Clock::now() - started).count() : 0.0;

      record.rows.push_back(row);
      const bool done = d.space.num_dofs > config.max_dofs;
      std::vector<int> marked;
      if (!done) {
        std::vector<double> eta2(est.result.per_element.size());
        for (size_t i = 0; i < eta2.size(); ++i) {
          eta2[i] = est.result.per_element[i] * est.result.per_element[i];
        }
        marked = dorfler_mark(eta2, config.theta);
      }
      if (observer) {
        observer(IterationState{iter, mesh, d.space, d.u_full, est.result, marked, error,
                                est.orthogonality});
      }
      if (done) break;
      mesh = bisect_marked(mesh, marked);
      if (problem.check_mesh) problem.check_mesh(mesh);
    } catch (const afem_abort&) {
      throw;
    } catch (const std::exception& e) {
      throw afem_abort(std::string("afem_run aborted at iteration ") + std::to_string(iter) +
                           ": " + e.what(),
                       record);
    }
  }
  return record;
}

double trailing_slope(const ConvergenceRecord& record, int window) {
  const int n = static_cast<int>(record.rows.size());
  const int m = std::min(window, n);
  if (m < 2) throw afem_error("trailing_slope: need at least two rows");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int i = n - m; i < n; ++i) {
    const double x = std::log10(static_cast<double>(record.rows[i].dofs));
    const double y = std::log10(record.rows[i].error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = m * sxx - sx * sx;
  if (denom == 0.0) throw afem_error("trailing_slope: degenerate dof sequence");
  return (m * sxy - sx * sy) / denom;
}

}  // namespace sfem
