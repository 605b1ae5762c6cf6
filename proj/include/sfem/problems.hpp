#pragma once

#include <functional>
#include <string>

#include "sfem/assembly.hpp"

namespace sfem {

/// A complete model problem: domain (as an initial mesh factory), bilinear
/// form, load, Dirichlet data on the whole boundary, and, when available,
/// the exact solution for error measurement.
struct ProblemSpec {
  std::string name;
  std::function<Mesh()> make_mesh;
  BilinearFormSpec form;
  std::function<double(Vec2)> rhs;
  std::function<double(Vec2)> dirichlet;
  std::function<double(Vec2)> exact;      // may be empty
  std::function<Vec2(Vec2)> exact_grad;   // may be empty
  std::vector<Vec2> singular_points;
  /// Extra mesh admissibility check (e.g. alignment with a coefficient
  /// discontinuity). Throws on violation.
  std::function<void(const Mesh&)> check_mesh;
  /// Load quadrature degree, -1 for the library default. Problems with a
  /// non-polynomial load raise this far enough that coarse and enriched
  /// load vectors stay consistent (Galerkin orthogonality of residuals
  /// holds to solver precision, not just to quadrature precision).
  int load_quadrature_degree = -1;

  bool has_exact() const { return static_cast<bool>(exact); }
};

/// Laplace problem on the L-shaped domain with the exact singular solution
/// r^(2/3) sin(2 theta / 3) as Dirichlet data (f = 0). The gradient is
/// unbounded at the re-entrant corner, which drives adaptive refinement.
ProblemSpec poisson_lshape();

/// -Laplace u = 2 pi^2 sin(pi x) sin(pi y) on the unit square, zero
/// Dirichlet data, smooth exact solution sin(pi x) sin(pi y).
ProblemSpec poisson_square_smooth();

/// Convection-diffusion problem on the unit square: diffusion 1 left of
/// x = 0.5 and 1e-3 right of it, convection beta = (1,2), f = 1, zero
/// Dirichlet data. No exact solution; no stabilization, so the initial
/// mesh must resolve the interface (structured n = 16) and meshes must
/// stay aligned with x = 0.5.
ProblemSpec convection_diffusion_interface();

/// Lookup by the names used in config files. Throws on unknown names.
ProblemSpec problem_by_name(const std::string& name);

}  // namespace sfem
