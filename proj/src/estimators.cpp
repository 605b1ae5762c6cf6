#include "sfem/estimators.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <map>
#include <random>

namespace sfem {

namespace {

std::vector<double> finish_indicators(std::vector<double>& eta2) {
  for (double& v : eta2) v = std::sqrt(std::max(v, 0.0));
  return std::move(eta2);
}

}  // namespace

Residual fine_residual(const Vec& u_coarse_full, const SpMat& A_fine, const Vec& b_fine,
                       const Prolongation& P) {
  const FeSpace& fine = *P.fine;
  const FeSpace& coarse = *P.coarse;
  if (u_coarse_full.size() != coarse.num_dofs || b_fine.size() != fine.num_dofs) {
    throw estimator_error("fine_residual: dimension mismatch");
  }

  Residual r;
  r.fine = P.fine;
  r.coarse = P.coarse;
  r.full = b_fine - A_fine * (P.matrix * u_coarse_full);
  for (int d = 0; d < fine.num_dofs; ++d) {
    if (fine.is_boundary[d]) r.full[d] = 0.0;
  }
  r.free = restrict_free(r.full, fine);

  // Galerkin orthogonality: the residual annihilates every embedded coarse
  // test function. Checked over the free blocks, with an absolute guard for
  // the degenerate case of a residual at solver-noise level.
  const Vec t = P.matrix.transpose() * r.full;
  double tmax = 0.0;
  for (int d : coarse.free_dofs) tmax = std::max(tmax, std::abs(t[d]));
  const double rmax = r.free.size() > 0 ? r.free.cwiseAbs().maxCoeff() : 0.0;
  r.orthogonality = rmax > 0.0 ? tmax / rmax : 0.0;
  const double noise_floor = 1e-11 * (1.0 + b_fine.cwiseAbs().maxCoeff());
  if (tmax > 1e-9 * rmax && tmax > noise_floor) {
    throw estimator_error("fine_residual: Galerkin orthogonality violated (|P'r| = " +
                          std::to_string(tmax) + ", |r| = " + std::to_string(rmax) +
                          "); coarse solution and enriched system are inconsistent");
  }
  return r;
}

EstimatorResult jacobi_estimate(const Residual& r, const SpMat& A_fine,
                                const ParentOf& parent_of, int num_coarse_elements) {
  const FeSpace& fine = *r.fine;
  const Vec diag = A_fine.diagonal();
  EstimatorResult result;
  result.kind = "jacobi";
  result.norm = "energy";

  std::vector<double> eta2(num_coarse_elements, 0.0);
  double total = 0.0;
  for (int i = 0; i < fine.num_free(); ++i) {
    const int d = fine.free_dofs[i];
    if (!(diag[d] > 0.0)) {
      throw estimator_error("jacobi_estimate: nonpositive diagonal at dof " + std::to_string(d));
    }
    const double share = r.free[i] * r.free[i] / diag[d];
    total += share;
    const auto elems = fine.dof_elements(d);
    const double split = share / static_cast<double>(elems.size());
    for (int e : elems) eta2[parent_of(e)] += split;
  }
  result.per_element = finish_indicators(eta2);
  result.global = std::sqrt(total);
  return result;
}

Vec gauss_seidel_smooth(const Vec& r_free, const SpMat& A_fine_free) {
  if (A_fine_free.rows() != r_free.size()) {
    throw estimator_error("gauss_seidel_smooth: dimension mismatch");
  }
  const Vec diag = A_fine_free.diagonal();
  for (int i = 0; i < diag.size(); ++i) {
    if (diag[i] == 0.0) {
      throw estimator_error("gauss_seidel_smooth: zero diagonal at dof " + std::to_string(i));
    }
  }
  return A_fine_free.triangularView<Eigen::Upper>().solve(r_free);
}

EstimatorResult smoothed_norm_estimate(const Vec& x_free, const FeSpace& fine,
                                       const std::string& norm, const ParentOf& parent_of,
                                       int num_coarse_elements, const std::string& kind) {
  if (norm != "h1_semi" && norm != "l2") {
    throw estimator_error("smoothed_norm_estimate: unsupported norm " + norm);
  }
  Vec x = Vec::Zero(fine.num_dofs);
  for (int i = 0; i < fine.num_free(); ++i) x[fine.free_dofs[i]] = x_free[i];

  const QuadratureRule& quad = triangle_quadrature(matrix_quadrature_degree(fine.degree));
  const int nloc = fine.dofs_per_element;
  Eigen::VectorXd xe(nloc);
  std::vector<double> eta2(num_coarse_elements, 0.0);
  double total = 0.0;
  for (int e = 0; e < fine.mesh->num_elements(); ++e) {
    const Eigen::MatrixXd K = norm == "h1_semi" ? element_stiffness_matrix(fine, e, quad)
                                                : element_mass_matrix(fine, e, quad);
    const auto dofs = fine.element_dofs(e);
    for (int i = 0; i < nloc; ++i) xe[i] = x[dofs[i]];
    const double energy = std::max(0.0, xe.dot(K * xe));
    eta2[parent_of(e)] += energy;
    total += energy;
  }
  EstimatorResult result;
  result.kind = kind;
  result.norm = norm;
  result.per_element = finish_indicators(eta2);
  result.global = std::sqrt(total);
  return result;
}

EstimatorResult low_high_degree_estimate(const FeSpace& space, const Vec& u_full,
                                         const BilinearFormSpec& form,
                                         const std::function<double(Vec2)>& f, int q,
                                         const std::string& kind, const std::string& norm,
                                         Residual* residual_out, int load_quadrature_degree) {
  if (q <= space.degree) {
    throw estimator_error("low_high_degree_estimate: q must exceed the space degree");
  }
  const FeSpace high = build_space(*space.mesh, q);
  const Prolongation P = build_prolongation_degree(space, high);
  const SpMat A_high = assemble_matrix(high, form);
  const Vec b_high = assemble_load(high, f, load_quadrature_degree);
  const Residual r = fine_residual(u_full, A_high, b_high, P);
  if (residual_out) *residual_out = r;

  const ParentOf identity = [](int e) { return e; };
  const int n_coarse = space.mesh->num_elements();
  if (kind == "jacobi" && norm == "energy") {
    return jacobi_estimate(r, A_high, identity, n_coarse);
  }
  const SpMat A_free = restrict_free(A_high, high);
  Vec x;
  if (kind == "jacobi") {
    const Vec diag = A_free.diagonal();
    for (int i = 0; i < diag.size(); ++i) {
      if (diag[i] == 0.0) {
        throw estimator_error("low_high_degree_estimate: zero diagonal at dof " +
                              std::to_string(i));
      }
    }
    x = r.free.cwiseQuotient(diag);
  } else if (kind == "gauss_seidel") {
    x = gauss_seidel_smooth(r.free, A_free);
  } else {
    throw estimator_error("low_high_degree_estimate: unsupported kind " + kind);
  }
  return smoothed_norm_estimate(x, high, norm, identity, n_coarse, kind);
}

EstimatorResult implicit_patch_estimate(const FeSpace& space, const Vec& u_full,
                                        const BilinearFormSpec& form,
                                        const std::function<double(Vec2)>& f, int q,
                                        int load_quadrature_degree) {
  if (!form.symmetric()) {
    throw estimator_error("implicit_patch_estimate: requires a symmetric form");
  }
  if (q <= space.degree) {
    throw estimator_error("implicit_patch_estimate: local degree must exceed the space degree");
  }
  const Mesh& mesh = *space.mesh;
  const FeSpace high = build_space(mesh, q);
  const Prolongation P = build_prolongation_degree(space, high);
  const SpMat A_high = assemble_matrix(high, form);
  const Vec b_high = assemble_load(high, f, load_quadrature_degree);
  // Unconstrained residual: patch-interior test functions are free dofs, so
  // the boundary rows zeroed by fine_residual are never read here.
  const Residual r = fine_residual(u_full, A_high, b_high, P);

  const std::vector<VertexPatch> patches = vertex_patches(mesh);
  std::vector<int> patch_of_element(mesh.num_elements(), -1);
  std::vector<double> eta2(mesh.num_elements(), 0.0);
  double total = 0.0;

  std::vector<int> local_dofs;
  for (int k = 0; k < mesh.num_vertices(); ++k) {
    const VertexPatch& patch = patches[k];
    for (int e : patch.elements) patch_of_element[e] = k;

    // A dof belongs to the local space when it is interior to the open
    // patch: all its incident elements lie in the patch and it is not a
    // constrained boundary dof.
    local_dofs.clear();
    for (int e : patch.elements) {
      for (int d : high.element_dofs(e)) {
        if (high.is_boundary[d]) continue;
        const auto incident = high.dof_elements(d);
        bool inside = true;
        for (int t : incident) inside = inside && patch_of_element[t] == k;
        if (inside && std::find(local_dofs.begin(), local_dofs.end(), d) == local_dofs.end()) {
          local_dofs.push_back(d);
        }
      }
    }
    if (local_dofs.empty()) continue;

    const int n = static_cast<int>(local_dofs.size());
    Eigen::MatrixXd K(n, n);
    Eigen::VectorXd rhs(n);
    for (int i = 0; i < n; ++i) {
      rhs[i] = r.full[local_dofs[i]];
      for (int j = 0; j < n; ++j) K(i, j) = A_high.coeff(local_dofs[i], local_dofs[j]);
    }
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(K);
    if (ldlt.info() != Eigen::Success) {
      throw estimator_error("implicit_patch_estimate: singular local problem at vertex " +
                            std::to_string(k));
    }
    const Eigen::VectorXd eta = ldlt.solve(rhs);
    const double energy = std::max(0.0, eta.dot(rhs));
    total += energy;
    const double split = energy / static_cast<double>(patch.elements.size());
    for (int e : patch.elements) eta2[e] += split;
  }

  EstimatorResult result;
  result.kind = "implicit_patch";
  result.norm = "h1_semi";
  result.per_element = finish_indicators(eta2);
  result.global = std::sqrt(total);
  return result;
}

namespace {

EstimatorResult residual_estimate(const FeSpace& space, const Vec& u_full,
                                  const std::function<double(Vec2)>& f,
                                  const std::vector<Vec2>& singular_points, bool l2_weights) {
  const Mesh& mesh = *space.mesh;
  const int p = space.degree;
  const LagrangeBasis& basis = LagrangeBasis::get(p);
  const int nloc = space.dofs_per_element;
  std::vector<double> eta2(mesh.num_elements(), 0.0);

  // Element term: || f + Lap(u_h) ||_T^2 with the load quadrature degree,
  // elevated on elements touching a declared singular point.
  std::vector<std::array<double, 3>> hess(nloc);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const bool elevated = !singular_points.empty() && touches_point(mesh, e, singular_points);
    const QuadratureRule& quad = triangle_quadrature(
        elevated ? elevated_quadrature_degree(p) : load_quadrature_degree(p));
    const ElementMap map = element_map(mesh, e);
    const auto dofs = space.element_dofs(e);
    double integral = 0.0;
    for (size_t qp = 0; qp < quad.points.size(); ++qp) {
      basis.eval_hess(quad.points[qp], hess);
      // Affine map: Hess_phys = Jinv' Hess_ref Jinv, and the Laplacian is
      // its trace.
      double lap = 0.0;
      for (int i = 0; i < nloc; ++i) {
        const double u = u_full[dofs[i]];
        const double hxx = hess[i][0], hxy = hess[i][1], hyy = hess[i][2];
        const double a = map.inv[0], b = map.inv[2];  // d(ref)/dx
        const double c = map.inv[1], d = map.inv[3];  // d(ref)/dy
        lap += u * (a * a * hxx + 2.0 * a * b * hxy + b * b * hyy +
                    c * c * hxx + 2.0 * c * d * hxy + d * d * hyy);
      }
      const double fx = f(map.to_physical(quad.points[qp]));
      if (!std::isfinite(fx)) {
        throw estimator_error("residual_estimate: non-finite load in element " +
                              std::to_string(e));
      }
      const double res = fx + lap;
      integral += quad.weights[qp] * map.det * res * res;
    }
    const double h = element_diameter(mesh, e);
    const double weight = l2_weights ? h * h * h * h : h * h;
    eta2[e] += weight * integral;
  }

  // Interior edge jumps of the normal derivative, integrated with a 1D
  // Gauss rule and split evenly between the two neighbors.
  std::map<std::pair<int, int>, std::array<int, 2>> edge_elems;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.elements[e];
    for (int i = 0; i < 3; ++i) {
      const auto key = std::minmax(t[(i + 1) % 3], t[(i + 2) % 3]);
      auto [it, inserted] = edge_elems.emplace(key, std::array<int, 2>{e, -1});
      if (!inserted) it->second[1] = e;
    }
  }
  const SegmentRule& seg = segment_quadrature(2 * p);
  std::vector<std::array<double, 2>> grads(nloc);
  for (const auto& [edge, elems] : edge_elems) {
    if (elems[1] < 0) continue;  // boundary edge
    const Vec2& a = mesh.vertices[edge.first];
    const Vec2& b = mesh.vertices[edge.second];
    const double ex = b[0] - a[0], ey = b[1] - a[1];
    const double len = std::hypot(ex, ey);
    const Vec2 normal = {ey / len, -ex / len};  // fixed side; sign cancels in the square

    double integral = 0.0;
    for (size_t qp = 0; qp < seg.points.size(); ++qp) {
      const Vec2 x = {a[0] + seg.points[qp] * ex, a[1] + seg.points[qp] * ey};
      double jump = 0.0;
      for (int side = 0; side < 2; ++side) {
        const int e = elems[side];
        const ElementMap map = element_map(mesh, e);
        basis.eval_grad(map.to_reference(x), grads);
        const auto dofs = space.element_dofs(e);
        double gx = 0.0, gy = 0.0;
        for (int i = 0; i < nloc; ++i) {
          const double u = u_full[dofs[i]];
          gx += u * (map.inv[0] * grads[i][0] + map.inv[2] * grads[i][1]);
          gy += u * (map.inv[1] * grads[i][0] + map.inv[3] * grads[i][1]);
        }
        jump += (side == 0 ? 1.0 : -1.0) * (gx * normal[0] + gy * normal[1]);
      }
      integral += seg.weights[qp] * len * jump * jump;
    }
    const double weight = l2_weights ? len * len * len : len;
    eta2[elems[0]] += 0.5 * weight * integral;
    eta2[elems[1]] += 0.5 * weight * integral;
  }

  EstimatorResult result;
  result.kind = l2_weights ? "residual_l2" : "residual_h1";
  result.norm = l2_weights ? "l2" : "h1_semi";
  double total = 0.0;
  for (double v : eta2) total += v;
  result.per_element = finish_indicators(eta2);
  result.global = std::sqrt(total);
  return result;
}

}  // namespace

EstimatorResult residual_estimate_h1(const FeSpace& space, const Vec& u_full,
                                     const std::function<double(Vec2)>& f,
                                     const std::vector<Vec2>& singular_points) {
  return residual_estimate(space, u_full, f, singular_points, false);
}

EstimatorResult residual_estimate_l2(const FeSpace& space, const Vec& u_full,
                                     const std::function<double(Vec2)>& f,
                                     const std::vector<Vec2>& singular_points) {
  return residual_estimate(space, u_full, f, singular_points, true);
}

ContractionEstimate contraction_factor_estimate(const SpMat& A_fine_free,
                                                const SpMat& A_coarse_free,
                                                const SpMat& P_free,
                                                const std::string& smoother, int num_probes,
                                                std::uint64_t seed) {
  if (P_free.rows() != A_fine_free.rows() || P_free.cols() != A_coarse_free.rows()) {
    throw estimator_error("contraction_factor_estimate: dimension mismatch");
  }
  if (num_probes < 1) {
    throw estimator_error("contraction_factor_estimate: need at least one probe");
  }
  auto apply_smoother = [&](const Vec& y) -> Vec {
    if (smoother == "gauss_seidel") {
      return A_fine_free.triangularView<Eigen::Lower>().solve(y);
    }
    if (smoother == "symmetric_gauss_seidel") {
      const Vec x1 = A_fine_free.triangularView<Eigen::Lower>().solve(y);
      return x1 + A_fine_free.triangularView<Eigen::Upper>().solve(Vec(y - A_fine_free * x1));
    }
    if (smoother == "jacobi") {
      return y.cwiseQuotient(Vec(A_fine_free.diagonal()));
    }
    throw estimator_error("contraction_factor_estimate: unknown smoother " + smoother);
  };

  const Eigen::SparseMatrix<double> A_coarse_col(A_coarse_free);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> coarse(A_coarse_col);
  if (coarse.info() != Eigen::Success) {
    throw estimator_error("contraction_factor_estimate: coarse factorization failed");
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ContractionEstimate out;
  for (int probe = 0; probe < num_probes; ++probe) {
    Vec v(A_fine_free.rows());
    for (int i = 0; i < v.size(); ++i) v[i] = gauss(rng);
    const double vn = weighted_norm(v, A_fine_free);
    if (vn == 0.0) continue;
    // Coarse correction, then one smoother application on its error.
    const Vec w = v - P_free * coarse.solve(Vec(P_free.transpose() * (A_fine_free * v)));
    const Vec ev = w - apply_smoother(A_fine_free * w);
    out.probe_values.push_back(weighted_norm(ev, A_fine_free) / vn);
    out.rho = std::max(out.rho, out.probe_values.back());
  }
  return out;
}

}  // namespace sfem
