#pragma once

#include <cstdint>
#include <string>

#include "sfem/assembly.hpp"
#include "sfem/solve.hpp"

namespace sfem {

struct estimator_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Residual of a coarse solution against an enriched space: values of
/// f(v) - a(u_h, v) for the enriched basis functions. The enriched space is
/// either the same-degree space on the uniform red refinement or a
/// higher-degree space on the same mesh; in both cases the coarse space
/// embeds exactly, so the residual vanishes on the embedded test functions
/// (Galerkin orthogonality), which is checked and recorded here.
struct Residual {
  Vec full;    // all enriched dofs, constrained rows zeroed
  Vec free;    // restriction to free enriched dofs
  double orthogonality = 0.0;  // ||P' r||_inf / ||r||_inf over free blocks
  const FeSpace* fine = nullptr;
  const FeSpace* coarse = nullptr;
};

Residual fine_residual(const Vec& u_coarse_full, const SpMat& A_fine, const Vec& b_fine,
                       const Prolongation& P);

/// One estimator evaluation: the global value and one indicator per coarse
/// element with sqrt(sum eta_T^2) == global.
struct EstimatorResult {
  std::string kind;
  std::string norm;
  double global = 0.0;
  std::vector<double> per_element;  // eta_T, one per coarse element
};

/// Map from fine elements to coarse elements. For the higher-degree
/// variant the "fine" mesh is the coarse mesh and this is the identity.
using ParentOf = std::function<int(int)>;

/// Diagonal (Jacobi) smoother estimator <r, D^{-1} r>^{1/2} over the free
/// enriched dofs. Each dof's share r_i^2 / a_ii is split equally among the
/// fine elements whose closure carries the dof, then accumulated onto
/// coarse elements.
EstimatorResult jacobi_estimate(const Residual& r, const SpMat& A_fine,
                                const ParentOf& parent_of, int num_coarse_elements);

/// One backward Gauss-Seidel sweep: solves U x = r with U the upper
/// triangle (diagonal included) of the free-restricted fine matrix, in the
/// fixed dof order of the space.
Vec gauss_seidel_smooth(const Vec& r_free, const SpMat& A_fine_free);

/// Norm of a smoothed residual x (free enriched dofs, zero on constrained
/// dofs): global = |x|_{H1} or ||x||_{L2}, localized by per-element energy
/// x_T' K_T x_T and accumulated onto coarse elements.
EstimatorResult smoothed_norm_estimate(const Vec& x_free, const FeSpace& fine,
                                       const std::string& norm, const ParentOf& parent_of,
                                       int num_coarse_elements, const std::string& kind);

/// Smoother estimators against the degree-q space on the same mesh:
/// assembles the enriched system, forms the residual, and dispatches on
/// (kind, norm) like the fine-coarse variants.
EstimatorResult low_high_degree_estimate(const FeSpace& space, const Vec& u_full,
                                         const BilinearFormSpec& form,
                                         const std::function<double(Vec2)>& f, int q,
                                         const std::string& kind, const std::string& norm,
                                         Residual* residual_out = nullptr,
                                         int load_quadrature_degree = -1);

/// Implicit estimator from local degree-q Dirichlet problems on vertex
/// patches: solve a(eta_k, v) = f(v) - a(u_h, v) over the dofs interior to
/// each patch; global value sqrt(sum_k |eta_k|^2), each patch energy split
/// equally among its elements. Requires a symmetric form.
EstimatorResult implicit_patch_estimate(const FeSpace& space, const Vec& u_full,
                                        const BilinearFormSpec& form,
                                        const std::function<double(Vec2)>& f, int q = 2,
                                        int load_quadrature_degree = -1);

/// Classical residual estimator for the Laplace problem in the H1 setting:
/// eta_T^2 = h_T^2 ||f + Lap(u_h)||_T^2 plus 1/2 h_E || [du_h/dn] ||_E^2
/// summed over the interior edges of T. h_T is the element diameter, h_E
/// the edge length.
EstimatorResult residual_estimate_h1(const FeSpace& space, const Vec& u_full,
                                     const std::function<double(Vec2)>& f,
                                     const std::vector<Vec2>& singular_points = {});

/// L2-weighted variant: h_T^4 on the element term and h_E^3 on the jumps.
EstimatorResult residual_estimate_l2(const FeSpace& space, const Vec& u_full,
                                     const std::function<double(Vec2)>& f,
                                     const std::vector<Vec2>& singular_points = {});

/// Sampled contraction factor of the two-level error operator
/// E = (I - S A)(I - P Ac^{-1} P' A) in the A-norm, with S one smoother
/// application. Matrices are free-dof restrictions; P_free is the free
/// block of the prolongation.
struct ContractionEstimate {
  double rho = 0.0;                  // max over probes
  std::vector<double> probe_values;  // per probe, in order
};

ContractionEstimate contraction_factor_estimate(const SpMat& A_fine_free,
                                                const SpMat& A_coarse_free,
                                                const SpMat& P_free,
                                                const std::string& smoother, int num_probes,
                                                std::uint64_t seed);

}  // namespace sfem
