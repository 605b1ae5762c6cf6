#include "sfem/problems.hpp"

#include <cmath>
#include <limits>

namespace sfem {

namespace {

// Polar angle in [0, 3 pi / 2], measured counterclockwise from the edge
// {x > 0, y = 0} of the L-shaped domain.
double lshape_theta(double x, double y) {
  double theta = std::atan2(y, x);
  if (theta < 0.0) theta += 2.0 * M_PI;
  return theta;
}

double lshape_exact(Vec2 p) {
  const double r2 = p[0] * p[0] + p[1] * p[1];
  if (r2 == 0.0) return 0.0;
  return std::pow(r2, 1.0 / 3.0) * std::sin(2.0 / 3.0 * lshape_theta(p[0], p[1]));
}

Vec2 lshape_exact_grad(Vec2 p) {
  const double r2 = p[0] * p[0] + p[1] * p[1];
  if (r2 == 0.0) {
    // The gradient blows up like r^(-1/3); quadrature points never land
    // exactly on the corner, so this only guards direct evaluation.
    const double inf = std::numeric_limits<double>::infinity();
    return {inf, inf};
  }
  const double t23 = 2.0 / 3.0 * lshape_theta(p[0], p[1]);
  const double s = std::sin(t23), c = std::cos(t23);
  const double r43 = std::pow(r2, 2.0 / 3.0);
  return {2.0 / 3.0 * (p[0] * s - p[1] * c) / r43, 2.0 / 3.0 * (p[1] * s + p[0] * c) / r43};
}

}  // namespace

ProblemSpec poisson_lshape() {
  ProblemSpec prob;
  prob.name = "poisson_lshape";
  prob.make_mesh = [] { return make_lshape(); };
  prob.form.diffusion = [](Vec2) { return 1.0; };
  prob.rhs = [](Vec2) { return 0.0; };
  prob.dirichlet = lshape_exact;
  prob.exact = lshape_exact;
  prob.exact_grad = lshape_exact_grad;
  prob.singular_points = {{0.0, 0.0}};
  return prob;
}

ProblemSpec poisson_square_smooth() {
  ProblemSpec prob;
  prob.name = "poisson_square_smooth";
  prob.make_mesh = [] { return make_structured_square(4); };
  prob.form.diffusion = [](Vec2) { return 1.0; };
  prob.rhs = [](Vec2 p) {
    return 2.0 * M_PI * M_PI * std::sin(M_PI * p[0]) * std::sin(M_PI * p[1]);
  };
  prob.dirichlet = [](Vec2) { return 0.0; };
  prob.exact = [](Vec2 p) { return std::sin(M_PI * p[0]) * std::sin(M_PI * p[1]); };
  prob.exact_grad = [](Vec2 p) -> Vec2 {
    return {M_PI * std::cos(M_PI * p[0]) * std::sin(M_PI * p[1]),
            M_PI * std::sin(M_PI * p[0]) * std::cos(M_PI * p[1])};
  };
  // The load is analytic but not polynomial. Gauss error on it decays
  // geometrically, so this degree puts the load quadrature at machine
  // precision on every mesh at or below the initial h, keeping residuals
  // Galerkin-orthogonal to solver precision.
  prob.load_quadrature_degree = 20;
  return prob;
}

ProblemSpec convection_diffusion_interface() {
  ProblemSpec prob;
  prob.name = "convection_diffusion_interface";
  prob.make_mesh = [] { return make_structured_square(16); };
  prob.form.diffusion = [](Vec2 p) { return p[0] <= 0.5 ? 1.0 : 1e-3; };
  prob.form.centroid_diffusion = true;
  prob.form.convection = Vec2{1.0, 2.0};
  prob.rhs = [](Vec2) { return 1.0; };
  prob.dirichlet = [](Vec2) { return 0.0; };
  prob.check_mesh = [](const Mesh& mesh) {
    for (int e = 0; e < mesh.num_elements(); ++e) {
      bool left = false, right = false;
      for (int v : mesh.elements[e]) {
        if (mesh.vertices[v][0] < 0.5 - 1e-12) left = true;
        if (mesh.vertices[v][0] > 0.5 + 1e-12) right = true;
      }
      if (left && right) {
        throw mesh_error("convection_diffusion_interface: element " + std::to_string(e) +
                         " straddles the coefficient interface x = 0.5");
      }
    }
  };
  return prob;
}

ProblemSpec problem_by_name(const std::string& name) {
  if (name == "poisson_lshape") return poisson_lshape();
  if (name == "poisson_square_smooth") return poisson_square_smooth();
  if (name == "convection_diffusion_interface") return convection_diffusion_interface();
  throw std::invalid_argument("unknown problem: " + name);
}

}  // namespace sfem
