#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>

#include "sfem/fe_space.hpp"
#include "sfem/quadrature.hpp"

namespace sfem {

struct assembly_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Scalar form a(u,v) = (alpha grad u, grad v) + (beta u, grad v) + (c u, v)
/// with a positive scalar diffusion coefficient, an optional constant
/// convection field and an optional reaction coefficient.
struct BilinearFormSpec {
  std::function<double(Vec2)> diffusion = [](Vec2) { return 1.0; };
  std::optional<Vec2> convection;
  std::function<double(Vec2)> reaction;  // absent means zero
  /// Evaluate the diffusion coefficient once per element at the centroid
  /// instead of per quadrature point. Meant for piecewise constant
  /// coefficients on meshes aligned with the discontinuity.
  bool centroid_diffusion = false;

  bool symmetric() const { return !convection.has_value(); }
};

/// Default quadrature degrees: max(2p,4) for matrices, 2p+2 for loads and
/// error integrals, raised to 2p+6 on elements touching a declared
/// singular point.
int matrix_quadrature_degree(int p);
int load_quadrature_degree(int p);
int elevated_quadrature_degree(int p);

/// True when some vertex of the element coincides with one of the points.
bool touches_point(const Mesh& mesh, int element, const std::vector<Vec2>& points);

SpMat assemble_matrix(const FeSpace& space, const BilinearFormSpec& form,
                      int quadrature_degree = -1);
SpMat assemble_mass_matrix(const FeSpace& space, int quadrature_degree = -1);
SpMat assemble_h1_seminorm_matrix(const FeSpace& space, int quadrature_degree = -1);

Vec assemble_load(const FeSpace& space, const std::function<double(Vec2)>& f,
                  int quadrature_degree = -1, const std::vector<Vec2>& singular_points = {});

/// Dense element matrices, used for per-element norm localization and by
/// the global assemblers.
Eigen::MatrixXd element_form_matrix(const FeSpace& space, int element,
                                    const BilinearFormSpec& form, const QuadratureRule& quad);
Eigen::MatrixXd element_mass_matrix(const FeSpace& space, int element,
                                    const QuadratureRule& quad);
Eigen::MatrixXd element_stiffness_matrix(const FeSpace& space, int element,
                                         const QuadratureRule& quad);

/// Free-dof restriction. The matrix version keeps rows and columns of the
/// free dofs in their global order; the load version also moves the lifted
/// Dirichlet data to the right-hand side.
SpMat restrict_free(const SpMat& A, const FeSpace& space);
Vec restrict_free_rhs(const SpMat& A, const Vec& b, const FeSpace& space, const Vec& lift);
/// Free block of a rectangular operator (rows over one space, columns over
/// another), e.g. of a prolongation.
SpMat restrict_free_pair(const SpMat& P, const FeSpace& row_space, const FeSpace& col_space);
Vec restrict_free(const Vec& v, const FeSpace& space);
/// Scatter a free-dof vector back to all dofs, filling constrained entries
/// from the lift.
Vec expand_free(const Vec& x_free, const FeSpace& space, const Vec& lift);

}  // namespace sfem
