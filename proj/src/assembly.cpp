#include "sfem/assembly.hpp"

#include <cmath>
#include <map>
#include <utility>

namespace sfem {

int matrix_quadrature_degree(int p) { return std::max(2 * p, 4); }
int load_quadrature_degree(int p) { return 2 * p + 2; }
int elevated_quadrature_degree(int p) { return 2 * p + 6; }

bool touches_point(const Mesh& mesh, int element, const std::vector<Vec2>& points) {
  for (int v : mesh.elements[element]) {
    for (const Vec2& pnt : points) {
      if (std::abs(mesh.vertices[v][0] - pnt[0]) < 1e-12 &&
          std::abs(mesh.vertices[v][1] - pnt[1]) < 1e-12) {
        return true;
      }
    }
  }
  return false;
}

namespace {

// Per-element reference data shared by all element integrators: basis
// values and gradients at each quadrature point.
struct RefData {
  const QuadratureRule* quad;
  int nloc;
  std::vector<double> values;                  // nq x nloc
  std::vector<std::array<double, 2>> grads;    // nq x nloc
};

const RefData& ref_data(int degree, const QuadratureRule& quad) {
  static std::map<std::pair<int, int>, RefData> cache;
  const auto key = std::make_pair(degree, quad.degree);
  auto it = cache.find(key);
  if (it == cache.end()) {
    const LagrangeBasis& basis = LagrangeBasis::get(degree);
    RefData data;
    data.quad = &quad;
    data.nloc = basis.size();
    const int nq = static_cast<int>(quad.points.size());
    data.values.resize(static_cast<size_t>(nq) * data.nloc);
    data.grads.resize(static_cast<size_t>(nq) * data.nloc);
    for (int q = 0; q < nq; ++q) {
      basis.eval(quad.points[q], {data.values.data() + static_cast<size_t>(q) * data.nloc,
                                  static_cast<size_t>(data.nloc)});
      basis.eval_grad(quad.points[q], {data.grads.data() + static_cast<size_t>(q) * data.nloc,
                                       static_cast<size_t>(data.nloc)});
    }
    it = cache.emplace(key, std::move(data)).first;
  }
  return it->second;
}

}  // namespace

Eigen::MatrixXd element_form_matrix(const FeSpace& space, int element,
                                    const BilinearFormSpec& form, const QuadratureRule& quad) {
  const RefData& ref = ref_data(space.degree, quad);
  const int n = ref.nloc;
  const ElementMap map = element_map(*space.mesh, element);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);

  double alpha_centroid = 0.0;
  if (form.centroid_diffusion) {
    alpha_centroid = form.diffusion(element_centroid(*space.mesh, element));
    if (!(alpha_centroid > 0.0)) {
      throw assembly_error("assemble: nonpositive diffusion coefficient");
    }
  }

  std::vector<std::array<double, 2>> phys_grads(n);
  const int nq = static_cast<int>(quad.points.size());
  for (int q = 0; q < nq; ++q) {
    const double w = quad.weights[q] * map.det;
    const Vec2 x = map.to_physical(quad.points[q]);
    const double alpha = form.centroid_diffusion ? alpha_centroid : form.diffusion(x);
    if (!(alpha > 0.0)) {
      throw assembly_error("assemble: nonpositive diffusion coefficient");
    }
    const auto* g = ref.grads.data() + static_cast<size_t>(q) * n;
    const auto* v = ref.values.data() + static_cast<size_t>(q) * n;
    for (int i = 0; i < n; ++i) {
      phys_grads[i] = {map.inv[0] * g[i][0] + map.inv[2] * g[i][1],
                       map.inv[1] * g[i][0] + map.inv[3] * g[i][1]};
    }
    const double c = form.reaction ? form.reaction(x) : 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        // Row i is the test function: entry(i,j) = a(phi_j, phi_i).
        double val = alpha * (phys_grads[i][0] * phys_grads[j][0] +
                              phys_grads[i][1] * phys_grads[j][1]);
        if (form.convection) {
          val += ((*form.convection)[0] * phys_grads[i][0] +
                  (*form.convection)[1] * phys_grads[i][1]) *
                 v[j];
        }
        if (form.reaction) val += c * v[i] * v[j];
        K(i, j) += w * val;
      }
    }
  }
  return K;
}

Eigen::MatrixXd element_mass_matrix(const FeSpace& space, int element,
                                    const QuadratureRule& quad) {
  const RefData& ref = ref_data(space.degree, quad);
  const int n = ref.nloc;
  const ElementMap map = element_map(*space.mesh, element);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  const int nq = static_cast<int>(quad.points.size());
  for (int q = 0; q < nq; ++q) {
    const double w = quad.weights[q] * map.det;
    const auto* v = ref.values.data() + static_cast<size_t>(q) * n;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) M(i, j) += w * v[i] * v[j];
    }
  }
  return M;
}

Eigen::MatrixXd element_stiffness_matrix(const FeSpace& space, int element,
                                         const QuadratureRule& quad) {
  const RefData& ref = ref_data(space.degree, quad);
  const int n = ref.nloc;
  const ElementMap map = element_map(*space.mesh, element);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  std::vector<std::array<double, 2>> phys_grads(n);
  const int nq = static_cast<int>(quad.points.size());
  for (int q = 0; q < nq; ++q) {
    const double w = quad.weights[q] * map.det;
    const auto* g = ref.grads.data() + static_cast<size_t>(q) * n;
    for (int i = 0; i < n; ++i) {
      phys_grads[i] = {map.inv[0] * g[i][0] + map.inv[2] * g[i][1],
                       map.inv[1] * g[i][0] + map.inv[3] * g[i][1]};
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        K(i, j) += w * (phys_grads[i][0] * phys_grads[j][0] +
                        phys_grads[i][1] * phys_grads[j][1]);
      }
    }
  }
  return K;
}

namespace {

template <typename ElementKernel>
SpMat assemble_from_elements(const FeSpace& space, ElementKernel&& kernel) {
  std::vector<Eigen::Triplet<double>> triplets;
  const int n = space.dofs_per_element;
  triplets.reserve(static_cast<size_t>(space.mesh->num_elements()) * n * n);
  for (int e = 0; e < space.mesh->num_elements(); ++e) {
    const Eigen::MatrixXd K = kernel(e);
    const auto dofs = space.element_dofs(e);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        triplets.emplace_back(dofs[i], dofs[j], K(i, j));
      }
    }
  }
  SpMat A(space.num_dofs, space.num_dofs);
  A.setFromTriplets(triplets.begin(), triplets.end());
  A.makeCompressed();
  return A;
}

}  // namespace

SpMat assemble_matrix(const FeSpace& space, const BilinearFormSpec& form,
                      int quadrature_degree) {
  const int deg = quadrature_degree < 0 ? matrix_quadrature_degree(space.degree)
                                        : quadrature_degree;
  const QuadratureRule& quad = triangle_quadrature(deg);
  return assemble_from_elements(
      space, [&](int e) { return element_form_matrix(space, e, form, quad); });
}

SpMat assemble_mass_matrix(const FeSpace& space, int quadrature_degree) {
  const int deg = quadrature_degree < 0 ? matrix_quadrature_degree(space.degree)
                                        : quadrature_degree;
  const QuadratureRule& quad = triangle_quadrature(deg);
  return assemble_from_elements(space,
                                [&](int e) { return element_mass_matrix(space, e, quad); });
}

SpMat assemble_h1_seminorm_matrix(const FeSpace& space, int quadrature_degree) {
  const int deg = quadrature_degree < 0 ? matrix_quadrature_degree(space.degree)
                                        : quadrature_degree;
  const QuadratureRule& quad = triangle_quadrature(deg);
  return assemble_from_elements(
      space, [&](int e) { return element_stiffness_matrix(space, e, quad); });
}

Vec assemble_load(const FeSpace& space, const std::function<double(Vec2)>& f,
                  int quadrature_degree, const std::vector<Vec2>& singular_points) {
  const int deg = quadrature_degree < 0 ? load_quadrature_degree(space.degree)
                                        : quadrature_degree;
  const int deg_hi = std::max(deg, elevated_quadrature_degree(space.degree));
  Vec b = Vec::Zero(space.num_dofs);
  for (int e = 0; e < space.mesh->num_elements(); ++e) {
    const bool elevated =
        !singular_points.empty() && touches_point(*space.mesh, e, singular_points);
    const QuadratureRule& quad = triangle_quadrature(elevated ? deg_hi : deg);
    const RefData& ref = ref_data(space.degree, quad);
    const ElementMap map = element_map(*space.mesh, e);
    const auto dofs = space.element_dofs(e);
    const int nq = static_cast<int>(quad.points.size());
    for (int q = 0; q < nq; ++q) {
      const double fx = f(map.to_physical(quad.points[q]));
      if (!std::isfinite(fx)) {
        throw assembly_error("assemble_load: non-finite integrand in element " +
                             std::to_string(e));
      }
      const double w = quad.weights[q] * map.det * fx;
      const auto* v = ref.values.data() + static_cast<size_t>(q) * ref.nloc;
      for (int i = 0; i < ref.nloc; ++i) b[dofs[i]] += w * v[i];
    }
  }
  return b;
}

SpMat restrict_free(const SpMat& A, const FeSpace& space) {
  if (A.rows() != space.num_dofs || A.cols() != space.num_dofs) {
    throw assembly_error("restrict_free: matrix does not match space");
  }
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(A.nonZeros());
  for (int row = 0; row < A.rows(); ++row) {
    const int fr = space.full_to_free[row];
    if (fr < 0) continue;
    for (SpMat::InnerIterator it(A, row); it; ++it) {
      const int fc = space.full_to_free[it.col()];
      if (fc >= 0) triplets.emplace_back(fr, fc, it.value());
    }
  }
  SpMat R(space.num_free(), space.num_free());
  R.setFromTriplets(triplets.begin(), triplets.end());
  R.makeCompressed();
  return R;
}

SpMat restrict_free_pair(const SpMat& P, const FeSpace& row_space, const FeSpace& col_space) {
  if (P.rows() != row_space.num_dofs || P.cols() != col_space.num_dofs) {
    throw assembly_error("restrict_free_pair: operator does not match spaces");
  }
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(P.nonZeros());
  for (int row = 0; row < P.rows(); ++row) {
    const int fr = row_space.full_to_free[row];
    if (fr < 0) continue;
    for (SpMat::InnerIterator it(P, row); it; ++it) {
      const int fc = col_space.full_to_free[it.col()];
      if (fc >= 0) triplets.emplace_back(fr, fc, it.value());
    }
  }
  SpMat R(row_space.num_free(), col_space.num_free());
  R.setFromTriplets(triplets.begin(), triplets.end());
  R.makeCompressed();
  return R;
}

Vec restrict_free_rhs(const SpMat& A, const Vec& b, const FeSpace& space, const Vec& lift) {
  const Vec shifted = b - A * lift;
  Vec r(space.num_free());
  for (int i = 0; i < space.num_free(); ++i) r[i] = shifted[space.free_dofs[i]];
  return r;
}

Vec restrict_free(const Vec& v, const FeSpace& space) {
  Vec r(space.num_free());
  for (int i = 0; i < space.num_free(); ++i) r[i] = v[space.free_dofs[i]];
  return r;
}

Vec expand_free(const Vec& x_free, const FeSpace& space, const Vec& lift) {
  Vec u = lift;
  for (int i = 0; i < space.num_free(); ++i) u[space.free_dofs[i]] = x_free[i];
  return u;
}

}  // namespace sfem
