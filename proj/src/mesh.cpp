#include "sfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace sfem {

namespace {

std::pair<int, int> sorted_pair(int a, int b) {
  return {std::min(a, b), std::max(a, b)};
}

double dist2(const Vec2& a, const Vec2& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  return dx * dx + dy * dy;
}

// Local edge i is opposite local vertex i. Ties go to the lowest index so
// the assignment is deterministic.
int longest_edge(const Mesh& m, const std::array<int, 3>& tri) {
  int arg = 0;
  double best = -1.0;
  for (int i = 0; i < 3; ++i) {
    const double l2 = dist2(m.vertices[tri[(i + 1) % 3]], m.vertices[tri[(i + 2) % 3]]);
    if (l2 > best) {
      best = l2;
      arg = i;
    }
  }
  return arg;
}

}  // namespace

void assign_longest_refinement_edges(Mesh& m) {
  m.refinement_edge.resize(m.elements.size());
  for (int e = 0; e < m.num_elements(); ++e) {
    m.refinement_edge[e] = longest_edge(m, m.elements[e]);
  }
}

double signed_area(const Mesh& mesh, int element) {
  const auto& t = mesh.elements[element];
  const Vec2& a = mesh.vertices[t[0]];
  const Vec2& b = mesh.vertices[t[1]];
  const Vec2& c = mesh.vertices[t[2]];
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
}

double element_diameter(const Mesh& mesh, int element) {
  const auto& t = mesh.elements[element];
  double d2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    d2 = std::max(d2, dist2(mesh.vertices[t[(i + 1) % 3]], mesh.vertices[t[(i + 2) % 3]]));
  }
  return std::sqrt(d2);
}

Vec2 element_centroid(const Mesh& mesh, int element) {
  const auto& t = mesh.elements[element];
  Vec2 c = {0.0, 0.0};
  for (int i = 0; i < 3; ++i) {
    c[0] += mesh.vertices[t[i]][0] / 3.0;
    c[1] += mesh.vertices[t[i]][1] / 3.0;
  }
  return c;
}

Mesh make_structured_square(int n) {
  if (n < 1) throw mesh_error("make_structured_square: n must be >= 1");
  Mesh m;
  const double h = 1.0 / n;
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      m.vertices.push_back({i * h, j * h});
    }
  }
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      m.elements.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      m.elements.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  }
  for (int i = 0; i < n; ++i) m.boundary_edges.push_back({vid(i, 0), vid(i + 1, 0), 0});
  for (int j = 0; j < n; ++j) m.boundary_edges.push_back({vid(n, j), vid(n, j + 1), 0});
  for (int i = n; i > 0; --i) m.boundary_edges.push_back({vid(i, n), vid(i - 1, n), 0});
  for (int j = n; j > 0; --j) m.boundary_edges.push_back({vid(0, j), vid(0, j - 1), 0});
  assign_longest_refinement_edges(m);
  return m;
}

Mesh make_lshape() {
  Mesh m;
  m.vertices = {{-1, -1}, {0, -1}, {-1, 0}, {0, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}};
  m.elements = {
      {0, 1, 3}, {0, 3, 2},  // lower-left square
      {2, 3, 5}, {3, 6, 5},  // upper-left square
      {3, 4, 7}, {3, 7, 6},  // upper-right square
  };
  m.boundary_edges = {{0, 1, 0}, {1, 3, 0}, {3, 4, 0}, {4, 7, 0},
                      {7, 6, 0}, {6, 5, 0}, {5, 2, 0}, {2, 0, 0}};
  assign_longest_refinement_edges(m);
  return m;
}

std::pair<Mesh, RefinementMap> uniform_red_refine(const Mesh& mesh) {
  Mesh fine;
  RefinementMap map;
  fine.level = mesh.level + 1;
  fine.vertices = mesh.vertices;
  map.vertex_origin.reserve(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) map.vertex_origin.push_back({v, -1});

  // Midpoints in first-appearance order over (element, local edge) pairs.
  std::map<std::pair<int, int>, int> midpoint;
  for (const auto& t : mesh.elements) {
    for (int i = 0; i < 3; ++i) {
      const int a = t[(i + 1) % 3];
      const int b = t[(i + 2) % 3];
      const auto key = sorted_pair(a, b);
      if (midpoint.emplace(key, fine.num_vertices()).second) {
        fine.vertices.push_back({0.5 * (mesh.vertices[a][0] + mesh.vertices[b][0]),
                                 0.5 * (mesh.vertices[a][1] + mesh.vertices[b][1])});
        map.vertex_origin.push_back({key.first, key.second});
      }
    }
  }

  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.elements[e];
    // mid[i] sits on the edge opposite local vertex i.
    std::array<int, 3> mid;
    for (int i = 0; i < 3; ++i) {
      mid[i] = midpoint.at(sorted_pair(t[(i + 1) % 3], t[(i + 2) % 3]));
    }
    const std::array<std::array<int, 3>, 4> children = {{
        {t[0], mid[2], mid[1]},
        {t[1], mid[0], mid[2]},
        {t[2], mid[1], mid[0]},
        {mid[0], mid[1], mid[2]},
    }};
    for (int k = 0; k < 4; ++k) {
      fine.elements.push_back(children[k]);
      map.parent_of.push_back(e);
      map.child_rank.push_back(k);
    }
  }
  assign_longest_refinement_edges(fine);

  for (const auto& be : mesh.boundary_edges) {
    const int m = midpoint.at(sorted_pair(be.v0, be.v1));
    fine.boundary_edges.push_back({be.v0, m, be.marker});
    fine.boundary_edges.push_back({m, be.v1, be.marker});
  }
  return {std::move(fine), std::move(map)};
}

Mesh bisect_marked(const Mesh& mesh, const std::vector<int>& marked) {
  for (int e : marked) {
    if (e < 0 || e >= mesh.num_elements()) {
      throw mesh_error("bisect_marked: marked element " + std::to_string(e) + " out of range");
    }
  }

  // Edges to cut, as coarse vertex pairs. An element with any cut edge must
  // also cut its refinement edge, so propagate until the set is stable.
  std::set<std::pair<int, int>> cut;
  auto refinement_pair = [&](int e) {
    const auto& t = mesh.elements[e];
    const int i = mesh.refinement_edge[e];
    return sorted_pair(t[(i + 1) % 3], t[(i + 2) % 3]);
  };
  for (int e : marked) cut.insert(refinement_pair(e));
  const int max_rounds = 3 * mesh.num_elements() + 3;
  int rounds = 0;
  for (bool changed = true; changed; ++rounds) {
    if (rounds > max_rounds) {
      throw mesh_error("bisect_marked: completion closure failed to terminate");
    }
    changed = false;
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const auto& t = mesh.elements[e];
      bool any = false;
      for (int i = 0; i < 3; ++i) {
        any = any || cut.count(sorted_pair(t[(i + 1) % 3], t[(i + 2) % 3])) > 0;
      }
      if (any && cut.insert(refinement_pair(e)).second) changed = true;
    }
  }

  Mesh out;
  out.level = mesh.level + 1;
  out.vertices = mesh.vertices;

  // Midpoints of cut edges, again in first-appearance order.
  std::map<std::pair<int, int>, int> midpoint;
  for (const auto& t : mesh.elements) {
    for (int i = 0; i < 3; ++i) {
      const auto key = sorted_pair(t[(i + 1) % 3], t[(i + 2) % 3]);
      if (cut.count(key) && midpoint.emplace(key, out.num_vertices()).second) {
        out.vertices.push_back({0.5 * (mesh.vertices[key.first][0] + mesh.vertices[key.second][0]),
                                0.5 * (mesh.vertices[key.first][1] + mesh.vertices[key.second][1])});
      }
    }
  }

  // Recursive bisection. Cutting edge (a,b) opposite peak p yields children
  // (a,m,p) and (m,b,p) whose refinement edges are the original edges (p,a)
  // and (b,p), so only original edges are ever looked up and the recursion
  // depth is at most two.
  auto emit = [&out, &cut, &midpoint](auto&& self, const std::array<int, 3>& tri, int re) -> void {
    const int p = tri[re];
    const int a = tri[(re + 1) % 3];
    const int b = tri[(re + 2) % 3];
    const auto it = midpoint.find(sorted_pair(a, b));
    if (it == midpoint.end()) {
      out.elements.push_back(tri);
      out.refinement_edge.push_back(re);
      return;
    }
    const int m = it->second;
    self(self, {a, m, p}, 1);
    self(self, {m, b, p}, 0);
  };
  for (int e = 0; e < mesh.num_elements(); ++e) {
    emit(emit, mesh.elements[e], mesh.refinement_edge[e]);
  }

  for (const auto& be : mesh.boundary_edges) {
    const auto it = midpoint.find(sorted_pair(be.v0, be.v1));
    if (it == midpoint.end()) {
      out.boundary_edges.push_back(be);
    } else {
      out.boundary_edges.push_back({be.v0, it->second, be.marker});
      out.boundary_edges.push_back({it->second, be.v1, be.marker});
    }
  }
  return out;
}

std::vector<VertexPatch> vertex_patches(const Mesh& mesh) {
  std::vector<VertexPatch> patches(mesh.num_vertices());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    for (int v : mesh.elements[e]) patches[v].elements.push_back(e);
  }
  for (const auto& be : mesh.boundary_edges) {
    patches[be.v0].on_boundary = true;
    patches[be.v1].on_boundary = true;
  }
  return patches;
}

std::vector<std::string> validate(const Mesh& mesh) {
  std::vector<std::string> issues;
  auto complain = [&issues](const std::string& s) { issues.push_back(s); };

  const int nv = mesh.num_vertices();
  const int ne = mesh.num_elements();
  if (static_cast<int>(mesh.refinement_edge.size()) != ne) {
    complain("refinement_edge size does not match element count");
    return issues;
  }

  for (int e = 0; e < ne; ++e) {
    const auto& t = mesh.elements[e];
    bool ok = true;
    for (int v : t) {
      if (v < 0 || v >= nv) {
        complain("element " + std::to_string(e) + " has vertex index out of range");
        ok = false;
      }
    }
    if (!ok) continue;
    if (t[0] == t[1] || t[1] == t[2] || t[2] == t[0]) {
      complain("element " + std::to_string(e) + " has repeated vertices");
      continue;
    }
    if (mesh.refinement_edge[e] < 0 || mesh.refinement_edge[e] > 2) {
      complain("element " + std::to_string(e) + " has invalid refinement edge index");
    }
    if (signed_area(mesh, e) <= 0.0) {
      complain("element " + std::to_string(e) + " is not counterclockwise");
    }
  }
  if (!issues.empty()) return issues;

  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& t : mesh.elements) {
    for (int i = 0; i < 3; ++i) {
      ++edge_count[sorted_pair(t[(i + 1) % 3], t[(i + 2) % 3])];
    }
  }
  std::map<std::pair<int, int>, int> boundary_count;
  for (const auto& be : mesh.boundary_edges) {
    if (be.v0 < 0 || be.v0 >= nv || be.v1 < 0 || be.v1 >= nv || be.v0 == be.v1) {
      complain("boundary edge with invalid vertex indices");
      continue;
    }
    ++boundary_count[sorted_pair(be.v0, be.v1)];
  }

  for (const auto& [edge, count] : edge_count) {
    const std::string name =
        "(" + std::to_string(edge.first) + "," + std::to_string(edge.second) + ")";
    if (count > 2) {
      complain("edge " + name + " shared by " + std::to_string(count) + " elements");
    } else if (count == 1 && boundary_count.count(edge) == 0) {
      complain("edge " + name + " has one element but is not a boundary edge");
    } else if (count == 2 && boundary_count.count(edge) > 0) {
      complain("interior edge " + name + " listed as a boundary edge");
    }
  }
  for (const auto& [edge, count] : boundary_count) {
    const std::string name =
        "(" + std::to_string(edge.first) + "," + std::to_string(edge.second) + ")";
    if (count > 1) complain("boundary edge " + name + " listed more than once");
    const auto it = edge_count.find(edge);
    if (it == edge_count.end()) {
      complain("boundary edge " + name + " is not an element edge");
    }
  }

  std::vector<char> used(nv, 0);
  for (const auto& t : mesh.elements) {
    for (int v : t) used[v] = 1;
  }
  for (int v = 0; v < nv; ++v) {
    if (!used[v]) complain("vertex " + std::to_string(v) + " belongs to no element");
  }
  return issues;
}

}  // namespace sfem
