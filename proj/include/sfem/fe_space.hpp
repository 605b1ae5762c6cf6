#pragma once

#include <Eigen/SparseCore>
#include <array>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "sfem/mesh.hpp"

namespace sfem {

using Vec = Eigen::VectorXd;
// Compressed row storage; columns are sorted within each row once the
// matrix is compressed, so iteration order is deterministic.
using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct fe_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Nodal Lagrange basis of one degree on the reference triangle, with
/// nodes at the uniform barycentric lattice. Basis functions come out as
/// products of three 1D factor polynomials, one per barycentric
/// coordinate, which is exact at the nodes without any linear solve.
///
/// Node order: the three vertices, then the interior nodes of local edges
/// 0,1,2 (edge i from vertex (i+1)%3 to vertex (i+2)%3), then element
/// interior nodes. This matches the per-element dof lists of FeSpace.
class LagrangeBasis {
 public:
  explicit LagrangeBasis(int degree);

  int degree() const { return p_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  /// Reference coordinates of node i.
  Vec2 node(int i) const;
  /// Integer barycentric triple of node i (sums to the degree).
  std::array<int, 3> node_index(int i) const { return nodes_[i]; }

  /// Values of all basis functions at a reference point.
  void eval(const Vec2& x, std::span<double> values) const;
  /// Reference gradients, laid out as [d/dxi, d/deta] per function.
  void eval_grad(const Vec2& x, std::span<std::array<double, 2>> grads) const;
  /// Reference second derivatives, laid out as [dxx, dxy, dyy].
  void eval_hess(const Vec2& x, std::span<std::array<double, 3>> hess) const;

  static const LagrangeBasis& get(int degree);

 private:
  int p_;
  std::vector<std::array<int, 3>> nodes_;
};

/// Affine map between the reference triangle and one mesh element.
struct ElementMap {
  Vec2 origin;                  // image of the reference origin
  std::array<double, 4> jac;    // row-major d(phys)/d(ref)
  std::array<double, 4> inv;    // row-major d(ref)/d(phys)
  double det;                   // twice the element area

  Vec2 to_physical(const Vec2& ref) const {
    return {origin[0] + jac[0] * ref[0] + jac[1] * ref[1],
            origin[1] + jac[2] * ref[0] + jac[3] * ref[1]};
  }
  Vec2 to_reference(const Vec2& phys) const {
    const double dx = phys[0] - origin[0];
    const double dy = phys[1] - origin[1];
    return {inv[0] * dx + inv[1] * dy, inv[2] * dx + inv[3] * dy};
  }
};

ElementMap element_map(const Mesh& mesh, int element);

/// Continuous Lagrange space on a mesh.
///
/// Global dof order is vertices first (in mesh order), then edge interior
/// dofs (edges in first-appearance order over elements, nodes running from
/// the lower-indexed to the higher-indexed endpoint), then element
/// interior dofs in element order. This order is part of the contract: it
/// fixes the sweep order of the Gauss-Seidel smoother.
struct FeSpace {
  const Mesh* mesh = nullptr;
  int degree = 1;
  int num_dofs = 0;
  int dofs_per_element = 3;
  std::vector<Vec2> dof_coords;
  std::vector<int> elem_dofs;        // dofs_per_element entries per element
  std::vector<char> is_boundary;     // per dof
  std::vector<int> free_dofs;        // increasing global indices
  std::vector<int> full_to_free;     // -1 on constrained dofs
  // Dof-to-element incidence in CSR form, used to localize estimator
  // contributions and to collect vertex-patch dofs.
  std::vector<int> dof_elem_offsets;
  std::vector<int> dof_elem_list;

  std::span<const int> element_dofs(int e) const {
    return {elem_dofs.data() + static_cast<size_t>(e) * dofs_per_element,
            static_cast<size_t>(dofs_per_element)};
  }
  std::span<const int> dof_elements(int dof) const {
    return {dof_elem_list.data() + dof_elem_offsets[dof],
            static_cast<size_t>(dof_elem_offsets[dof + 1] - dof_elem_offsets[dof])};
  }
  int num_free() const { return static_cast<int>(free_dofs.size()); }
};

FeSpace build_space(const Mesh& mesh, int degree);

/// Exact embedding of a coarse space into a fine one. Rows are fine dofs,
/// columns coarse dofs; row g holds the coarse basis values at fine dof g.
struct Prolongation {
  SpMat matrix;
  const FeSpace* fine = nullptr;
  const FeSpace* coarse = nullptr;
};

/// Coarse space on a mesh into the same-degree space on its uniform red
/// refinement.
Prolongation build_prolongation_refine(const FeSpace& coarse, const FeSpace& fine,
                                       const RefinementMap& map);

/// Degree-p space into a degree-q space (q > p) on the same mesh.
Prolongation build_prolongation_degree(const FeSpace& low, const FeSpace& high);

/// Nodal interpolant: g evaluated at every dof coordinate.
Vec interpolate(const FeSpace& space, const std::function<double(Vec2)>& g);

}  // namespace sfem
