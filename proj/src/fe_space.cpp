#include "sfem/fe_space.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace sfem {

namespace {

// Value and first two derivatives (in the barycentric coordinate) of the
// 1D factor polynomial L_i(t) = prod_{r<i} (p*t - r)/(i - r).
struct Factor {
  double v = 1.0;
  double d = 0.0;
  double h = 0.0;
};

Factor eval_factor(int p, int i, double t) {
  Factor f;
  for (int r = 0; r < i; ++r) {
    const double g = (p * t - r) / (i - r);
    const double gd = static_cast<double>(p) / (i - r);
    f.h = f.h * g + 2.0 * f.d * gd;
    f.d = f.d * g + f.v * gd;
    f.v = f.v * g;
  }
  return f;
}

}  // namespace

LagrangeBasis::LagrangeBasis(int degree) : p_(degree) {
  if (degree < 1) throw fe_error("LagrangeBasis: degree must be >= 1");
  nodes_.push_back({p_, 0, 0});
  nodes_.push_back({0, p_, 0});
  nodes_.push_back({0, 0, p_});
  // Edge i runs from local vertex (i+1)%3 to (i+2)%3; its nodes move mass
  // from the first barycentric slot to the second.
  const std::array<std::array<int, 2>, 3> edge_verts = {{{1, 2}, {2, 0}, {0, 1}}};
  for (const auto& ev : edge_verts) {
    for (int k = 1; k < p_; ++k) {
      std::array<int, 3> n = {0, 0, 0};
      n[ev[0]] = p_ - k;
      n[ev[1]] = k;
      nodes_.push_back(n);
    }
  }
  for (int i = 1; i <= p_ - 2; ++i) {
    for (int j = 1; j <= p_ - 1 - i; ++j) {
      nodes_.push_back({i, j, p_ - i - j});
    }
  }
}

Vec2 LagrangeBasis::node(int i) const {
  const auto& n = nodes_[i];
  return {static_cast<double>(n[1]) / p_, static_cast<double>(n[2]) / p_};
}

void LagrangeBasis::eval(const Vec2& x, std::span<double> values) const {
  const std::array<double, 3> lambda = {1.0 - x[0] - x[1], x[0], x[1]};
  for (int i = 0; i < size(); ++i) {
    double v = 1.0;
    for (int c = 0; c < 3; ++c) v *= eval_factor(p_, nodes_[i][c], lambda[c]).v;
    values[i] = v;
  }
}

void LagrangeBasis::eval_grad(const Vec2& x, std::span<std::array<double, 2>> grads) const {
  const std::array<double, 3> lambda = {1.0 - x[0] - x[1], x[0], x[1]};
  // d(lambda)/dx and d(lambda)/dy on the reference triangle.
  static constexpr std::array<double, 3> lx = {-1.0, 1.0, 0.0};
  static constexpr std::array<double, 3> ly = {-1.0, 0.0, 1.0};
  for (int i = 0; i < size(); ++i) {
    std::array<Factor, 3> f;
    for (int c = 0; c < 3; ++c) f[c] = eval_factor(p_, nodes_[i][c], lambda[c]);
    double gx = 0.0, gy = 0.0;
    for (int c = 0; c < 3; ++c) {
      const double rest = f[(c + 1) % 3].v * f[(c + 2) % 3].v;
      gx += f[c].d * lx[c] * rest;
      gy += f[c].d * ly[c] * rest;
    }
    grads[i] = {gx, gy};
  }
}

void LagrangeBasis::eval_hess(const Vec2& x, std::span<std::array<double, 3>> hess) const {
  const std::array<double, 3> lambda = {1.0 - x[0] - x[1], x[0], x[1]};
  static constexpr std::array<double, 3> lx = {-1.0, 1.0, 0.0};
  static constexpr std::array<double, 3> ly = {-1.0, 0.0, 1.0};
  for (int i = 0; i < size(); ++i) {
    std::array<Factor, 3> f;
    for (int c = 0; c < 3; ++c) f[c] = eval_factor(p_, nodes_[i][c], lambda[c]);
    double hxx = 0.0, hxy = 0.0, hyy = 0.0;
    for (int c = 0; c < 3; ++c) {
      const int c1 = (c + 1) % 3, c2 = (c + 2) % 3;
      const double rest = f[c1].v * f[c2].v;
      hxx += f[c].h * lx[c] * lx[c] * rest;
      hxy += f[c].h * lx[c] * ly[c] * rest;
      hyy += f[c].h * ly[c] * ly[c] * rest;
      // Cross terms between distinct factors, each unordered pair once.
      const double pair = f[c].d * f[c1].d * f[c2].v;
      hxx += 2.0 * pair * lx[c] * lx[c1];
      hxy += pair * (lx[c] * ly[c1] + ly[c] * lx[c1]);
      hyy += 2.0 * pair * ly[c] * ly[c1];
    }
    hess[i] = {hxx, hxy, hyy};
  }
}

const LagrangeBasis& LagrangeBasis::get(int degree) {
  static std::map<int, LagrangeBasis> cache;
  auto it = cache.find(degree);
  if (it == cache.end()) it = cache.emplace(degree, LagrangeBasis(degree)).first;
  return it->second;
}

ElementMap element_map(const Mesh& mesh, int element) {
  const auto& t = mesh.elements[element];
  const Vec2& a = mesh.vertices[t[0]];
  const Vec2& b = mesh.vertices[t[1]];
  const Vec2& c = mesh.vertices[t[2]];
  ElementMap m;
  m.origin = a;
  m.jac = {b[0] - a[0], c[0] - a[0], b[1] - a[1], c[1] - a[1]};
  m.det = m.jac[0] * m.jac[3] - m.jac[1] * m.jac[2];
  if (m.det <= 0.0) throw fe_error("element_map: element is degenerate or misoriented");
  m.inv = {m.jac[3] / m.det, -m.jac[1] / m.det, -m.jac[2] / m.det, m.jac[0] / m.det};
  return m;
}

FeSpace build_space(const Mesh& mesh, int degree) {
  if (degree < 1) throw fe_error("build_space: degree must be >= 1");
  FeSpace V;
  V.mesh = &mesh;
  V.degree = degree;
  V.dofs_per_element = (degree + 1) * (degree + 2) / 2;

  const int nv = mesh.num_vertices();
  const int ne = mesh.num_elements();
  const int per_edge = degree - 1;
  const int per_elem = (degree - 1) * (degree - 2) / 2;

  // Edges in first-appearance order over (element, local edge) pairs.
  std::map<std::pair<int, int>, int> edge_id;
  for (const auto& t : mesh.elements) {
    for (int i = 0; i < 3; ++i) {
      const int a = t[(i + 1) % 3], b = t[(i + 2) % 3];
      edge_id.emplace(std::minmax(a, b), static_cast<int>(edge_id.size()));
    }
  }
  const int nedges = static_cast<int>(edge_id.size());
  V.num_dofs = nv + nedges * per_edge + ne * per_elem;
  V.dof_coords.resize(V.num_dofs);
  V.elem_dofs.resize(static_cast<size_t>(ne) * V.dofs_per_element);

  for (int v = 0; v < nv; ++v) V.dof_coords[v] = mesh.vertices[v];

  const int edge_base = nv;
  const int interior_base = nv + nedges * per_edge;
  for (const auto& [edge, id] : edge_id) {
    const Vec2& a = mesh.vertices[edge.first];
    const Vec2& b = mesh.vertices[edge.second];
    for (int k = 1; k <= per_edge; ++k) {
      const double t = static_cast<double>(k) / degree;
      V.dof_coords[edge_base + id * per_edge + (k - 1)] = {a[0] + t * (b[0] - a[0]),
                                                           a[1] + t * (b[1] - a[1])};
    }
  }

  const LagrangeBasis& basis = LagrangeBasis::get(degree);
  for (int e = 0; e < ne; ++e) {
    const auto& t = mesh.elements[e];
    int* dofs = V.elem_dofs.data() + static_cast<size_t>(e) * V.dofs_per_element;
    dofs[0] = t[0];
    dofs[1] = t[1];
    dofs[2] = t[2];
    int slot = 3;
    for (int i = 0; i < 3; ++i) {
      const int a = t[(i + 1) % 3], b = t[(i + 2) % 3];
      const int id = edge_id.at(std::minmax(a, b));
      const int base = edge_base + id * per_edge;
      // Global edge dofs run from the lower to the higher vertex index;
      // flip when the local direction disagrees.
      for (int k = 1; k <= per_edge; ++k, ++slot) {
        dofs[slot] = a < b ? base + (k - 1) : base + (per_edge - k);
      }
    }
    const ElementMap map = element_map(mesh, e);
    for (int k = 0; k < per_elem; ++k, ++slot) {
      const int dof = interior_base + e * per_elem + k;
      dofs[slot] = dof;
      V.dof_coords[dof] = map.to_physical(basis.node(3 + 3 * per_edge + k));
    }
  }

  V.is_boundary.assign(V.num_dofs, 0);
  for (const auto& be : mesh.boundary_edges) {
    V.is_boundary[be.v0] = 1;
    V.is_boundary[be.v1] = 1;
    const auto it = edge_id.find(std::minmax(be.v0, be.v1));
    if (it == edge_id.end()) throw fe_error("build_space: boundary edge is not an element edge");
    for (int k = 0; k < per_edge; ++k) V.is_boundary[edge_base + it->second * per_edge + k] = 1;
  }
  V.full_to_free.assign(V.num_dofs, -1);
  for (int d = 0; d < V.num_dofs; ++d) {
    if (!V.is_boundary[d]) {
      V.full_to_free[d] = static_cast<int>(V.free_dofs.size());
      V.free_dofs.push_back(d);
    }
  }

  // Dof-to-element incidence.
  V.dof_elem_offsets.assign(V.num_dofs + 1, 0);
  for (int d : V.elem_dofs) ++V.dof_elem_offsets[d + 1];
  for (int d = 0; d < V.num_dofs; ++d) V.dof_elem_offsets[d + 1] += V.dof_elem_offsets[d];
  V.dof_elem_list.resize(V.elem_dofs.size());
  std::vector<int> cursor(V.dof_elem_offsets.begin(), V.dof_elem_offsets.end() - 1);
  for (int e = 0; e < ne; ++e) {
    for (int d : V.element_dofs(e)) V.dof_elem_list[cursor[d]++] = e;
  }
  return V;
}

namespace {

// Shared core of the two prolongation builders: row g of the matrix holds
// the coarse basis evaluated at fine dof g inside its parent element.
Prolongation build_prolongation(const FeSpace& coarse, const FeSpace& fine,
                                const std::function<int(int)>& parent_of) {
  const LagrangeBasis& basis = LagrangeBasis::get(coarse.degree);
  const int nloc = coarse.dofs_per_element;
  std::vector<double> values(nloc);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<size_t>(fine.num_dofs) * nloc);

  for (int g = 0; g < fine.num_dofs; ++g) {
    const auto incident = fine.dof_elements(g);
    if (incident.empty()) throw fe_error("build_prolongation: fine dof in no element");
    const int parent = parent_of(incident.front());
    const ElementMap map = element_map(*coarse.mesh, parent);
    const Vec2 ref = map.to_reference(fine.dof_coords[g]);
    basis.eval(ref, values);
    const auto cdofs = coarse.element_dofs(parent);
    for (int j = 0; j < nloc; ++j) {
      if (std::abs(values[j]) > 1e-14) triplets.emplace_back(g, cdofs[j], values[j]);
    }
  }

  Prolongation P;
  P.fine = &fine;
  P.coarse = &coarse;
  P.matrix.resize(fine.num_dofs, coarse.num_dofs);
  P.matrix.setFromTriplets(triplets.begin(), triplets.end());
  P.matrix.makeCompressed();
  return P;
}

}  // namespace

Prolongation build_prolongation_refine(const FeSpace& coarse, const FeSpace& fine,
                                       const RefinementMap& map) {
  if (coarse.degree != fine.degree) {
    throw fe_error("build_prolongation_refine: spaces must share one degree");
  }
  if (map.parent_of.size() != static_cast<size_t>(fine.mesh->num_elements())) {
    throw fe_error("build_prolongation_refine: refinement map does not match fine mesh");
  }
  return build_prolongation(coarse, fine, [&map](int e) { return map.parent_of[e]; });
}

Prolongation build_prolongation_degree(const FeSpace& low, const FeSpace& high) {
  if (low.mesh != high.mesh) {
    throw fe_error("build_prolongation_degree: spaces must share one mesh");
  }
  if (low.degree >= high.degree) {
    throw fe_error("build_prolongation_degree: target degree must exceed source degree");
  }
  return build_prolongation(low, high, [](int e) { return e; });
}

Vec interpolate(const FeSpace& space, const std::function<double(Vec2)>& g) {
  Vec u(space.num_dofs);
  for (int d = 0; d < space.num_dofs; ++d) {
    u[d] = g(space.dof_coords[d]);
    if (!std::isfinite(u[d])) {
      throw fe_error("interpolate: non-finite value at dof " + std::to_string(d));
    }
  }
  return u;
}

}  // namespace sfem
