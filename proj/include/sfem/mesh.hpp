#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sfem {

using Vec2 = std::array<double, 2>;

struct mesh_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Boundary edge as an ordered vertex pair plus an integer marker.
/// Markers are problem-defined; every built-in problem uses marker 0
/// and imposes Dirichlet data on the whole boundary.
struct BoundaryEdge {
  int v0 = -1;
  int v1 = -1;
  int marker = 0;
};

/// Conforming triangle mesh.
///
/// Element vertices are listed counterclockwise. Local edge i runs between
/// local vertices (i+1)%3 and (i+2)%3, i.e. opposite local vertex i, and
/// refinement_edge[e] stores the local index of the edge that bisection
/// cuts first. Newest-vertex bisection keeps this index consistent across
/// generations, which bounds the number of triangle shapes ever produced.
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> elements;
  std::vector<int> refinement_edge;
  std::vector<BoundaryEdge> boundary_edges;
  int level = 0;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_elements() const { return static_cast<int>(elements.size()); }
};

/// Maps a refined mesh back to the mesh it was produced from.
/// parent_of[t] is the coarse element containing fine element t and
/// child_rank[t] its position among the parent's children (0..3 for red
/// refinement). vertex_origin[v] holds either {coarse vertex, -1} for an
/// inherited vertex or the two coarse endpoints of the edge whose midpoint
/// the vertex is.
struct RefinementMap {
  std::vector<int> parent_of;
  std::vector<int> child_rank;
  std::vector<std::array<int, 2>> vertex_origin;
};

/// Elements incident to one vertex, in increasing element order.
struct VertexPatch {
  std::vector<int> elements;
  bool on_boundary = false;
};

/// Structured triangulation of the unit square with n x n cells, each cell
/// split along its lower-left to upper-right diagonal. 2n^2 elements.
Mesh make_structured_square(int n);

/// Six-triangle mesh of the L-shaped domain (-1,1)^2 \ [0,1)x(-1,0], with
/// every diagonal incident to the re-entrant corner at the origin.
Mesh make_lshape();

/// Uniform red refinement: every element is split into four congruent
/// children through its edge midpoints. Children are appended per parent in
/// the order corner 0, corner 1, corner 2, center.
std::pair<Mesh, RefinementMap> uniform_red_refine(const Mesh& mesh);

/// Newest-vertex bisection of the marked elements plus the completion
/// closure that removes hanging nodes.
Mesh bisect_marked(const Mesh& mesh, const std::vector<int>& marked);

/// Per-vertex element stars.
std::vector<VertexPatch> vertex_patches(const Mesh& mesh);

/// Consistency diagnostics: orientation, conformity (every interior edge
/// shared by exactly two elements), boundary closure, index validity.
/// Empty result means the mesh is valid.
std::vector<std::string> validate(const Mesh& mesh);

/// Resets every refinement edge to the locally longest edge, ties going to
/// the lowest local index. Used when a mesh arrives without bisection
/// history, e.g. from an external file.
void assign_longest_refinement_edges(Mesh& mesh);

double signed_area(const Mesh& mesh, int element);
double element_diameter(const Mesh& mesh, int element);
Vec2 element_centroid(const Mesh& mesh, int element);

}  // namespace sfem
