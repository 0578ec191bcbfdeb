#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace lodwave {

struct Point2 {
  double x = 0.0, y = 0.0;
};

struct Domain2D {
  double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }

  void validate() const {
    if (!(x_min < x_max) || !(y_min < y_max))
      throw std::invalid_argument("Domain2D: empty or inverted rectangle");
  }
};

// Triangulation of an axis-aligned rectangle into 2 n^2 right triangles.
// Vertices are stored in lattice order (row major, y outer); every square
// cell is split by its lower-left to upper-right diagonal, lower triangle
// first. All triangles are counterclockwise.
struct Triangulation {
  Domain2D domain;
  int n_per_side = 0;
  std::vector<Point2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::uint8_t> boundary_flags;   // per vertex
  std::vector<int> interior_node_index;       // dense index, -1 on the boundary
  std::vector<int> interior_nodes;            // global ids of interior vertices

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }
  int n_interior() const { return static_cast<int>(interior_nodes.size()); }

  int vertex_id(int i, int j) const { return j * (n_per_side + 1) + i; }

  double signed_area(int t) const {
    const auto& tri = triangles[t];
    const Point2& a = vertices[tri[0]];
    const Point2& b = vertices[tri[1]];
    const Point2& c = vertices[tri[2]];
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
  }

  Point2 barycenter(int t) const {
    const auto& tri = triangles[t];
    return {(vertices[tri[0]].x + vertices[tri[1]].x + vertices[tri[2]].x) / 3.0,
            (vertices[tri[0]].y + vertices[tri[1]].y + vertices[tri[2]].y) / 3.0};
  }

  std::vector<std::vector<int>> vertex_to_triangles() const {
    std::vector<std::vector<int>> inc(vertices.size());
    for (int t = 0; t < n_triangles(); ++t)
      for (int v : triangles[t]) inc[v].push_back(t);
    return inc;
  }
};

inline Triangulation build_structured_mesh(const Domain2D& domain, int n_per_side) {
  domain.validate();
  if (n_per_side < 1) throw std::invalid_argument("build_structured_mesh: n_per_side >= 1");
  Triangulation tri;
  tri.domain = domain;
  tri.n_per_side = n_per_side;
  const int n = n_per_side;
  const double hx = domain.width() / n;
  const double hy = domain.height() / n;
  tri.vertices.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      tri.vertices.push_back({domain.x_min + i * hx, domain.y_min + j * hy});
  tri.triangles.reserve(2u * n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int v00 = tri.vertex_id(i, j);
      const int v10 = tri.vertex_id(i + 1, j);
      const int v01 = tri.vertex_id(i, j + 1);
      const int v11 = tri.vertex_id(i + 1, j + 1);
      tri.triangles.push_back({v00, v10, v11});  // below the diagonal
      tri.triangles.push_back({v00, v11, v01});  // above the diagonal
    }
  tri.boundary_flags.assign(tri.vertices.size(), 0);
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      tri.boundary_flags[tri.vertex_id(i, j)] = (i == 0 || i == n || j == 0 || j == n) ? 1 : 0;
  tri.interior_node_index.assign(tri.vertices.size(), -1);
  for (int v = 0; v < tri.n_vertices(); ++v)
    if (!tri.boundary_flags[v]) {
      tri.interior_node_index[v] = static_cast<int>(tri.interior_nodes.size());
      tri.interior_nodes.push_back(v);
    }
  return tri;
}

// Two-level hierarchy with h = H / 2^levels. Refinement is uniform red
// refinement (each triangle split into 4 congruent children via the edge
// midpoints); for this structured family the refined mesh coincides with the
// structured mesh on the 2^levels-times finer lattice, which is how it is
// enumerated.
struct MeshHierarchy {
  Triangulation coarse;
  Triangulation fine;
  int refinement_levels = 0;
  std::vector<std::vector<int>> coarse_to_fine_elements;  // 4^levels fine ids each
  std::vector<int> coarse_node_embedding;                 // coarse vertex -> fine vertex
};

inline MeshHierarchy refine_hierarchy(const Triangulation& coarse, int levels) {
  if (levels < 1)
    throw std::invalid_argument("refine_hierarchy: levels >= 1 required (h <= H/2)");
  if (coarse.n_per_side < 1)
    throw std::invalid_argument("refine_hierarchy: structured coarse mesh required");
  MeshHierarchy hier;
  hier.coarse = coarse;
  hier.refinement_levels = levels;
  const int n = coarse.n_per_side;
  const int m = 1 << levels;  // fine cells per coarse cell and side
  const int nf = n * m;
  hier.fine = build_structured_mesh(coarse.domain, nf);

  hier.coarse_to_fine_elements.assign(coarse.n_triangles(), {});
  for (auto& v : hier.coarse_to_fine_elements) v.reserve(static_cast<std::size_t>(m) * m);
  for (int cj = 0; cj < n; ++cj)
    for (int ci = 0; ci < n; ++ci) {
      const int lower = 2 * (cj * n + ci);
      const int upper = lower + 1;
      for (int v = 0; v < m; ++v)
        for (int u = 0; u < m; ++u) {
          const int fsq = (cj * m + v) * nf + (ci * m + u);
          // Fine cells strictly below the coarse diagonal belong to the lower
          // coarse triangle, strictly above to the upper one; cells on the
          // diagonal are themselves split by it.
          if (v < u) {
            hier.coarse_to_fine_elements[lower].push_back(2 * fsq);
            hier.coarse_to_fine_elements[lower].push_back(2 * fsq + 1);
          } else if (v > u) {
            hier.coarse_to_fine_elements[upper].push_back(2 * fsq);
            hier.coarse_to_fine_elements[upper].push_back(2 * fsq + 1);
          } else {
            hier.coarse_to_fine_elements[lower].push_back(2 * fsq);
            hier.coarse_to_fine_elements[upper].push_back(2 * fsq + 1);
          }
        }
    }
  for (auto& v : hier.coarse_to_fine_elements) std::sort(v.begin(), v.end());

  hier.coarse_node_embedding.resize(coarse.n_vertices());
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      hier.coarse_node_embedding[coarse.vertex_id(i, j)] = hier.fine.vertex_id(i * m, j * m);
  return hier;
}

// Element patch U_k(K): K dilated by k layers of vertex-adjacent coarse
// elements, together with the induced fine sets.
struct Patch {
  int k = 0;
  std::vector<int> coarse_elements;          // sorted coarse triangle ids
  std::vector<int> fine_elements;            // sorted fine triangle ids
  std::vector<int> fine_free_nodes;          // fine vertex ids strictly inside the
                                             // patch and away from the outer boundary
  std::vector<int> constrained_coarse_nodes; // interior coarse vertices whose basis
                                             // support meets the patch
};

inline Patch build_patch(const MeshHierarchy& hier, int coarse_element, int k) {
  const Triangulation& tc = hier.coarse;
  if (coarse_element < 0 || coarse_element >= tc.n_triangles())
    throw std::invalid_argument("build_patch: coarse element out of range");
  if (k < 0) throw std::invalid_argument("build_patch: k >= 0 required");

  Patch patch;
  patch.k = k;

  const auto vertex_inc = tc.vertex_to_triangles();
  std::vector<std::uint8_t> in_patch(tc.n_triangles(), 0);
  in_patch[coarse_element] = 1;
  std::vector<int> frontier{coarse_element};
  for (int layer = 0; layer < k && !frontier.empty(); ++layer) {
    std::vector<int> next;
    for (int e : frontier)
      for (int v : tc.triangles[e])
        for (int nb : vertex_inc[v])
          if (!in_patch[nb]) {
            in_patch[nb] = 1;
            next.push_back(nb);
          }
    frontier = std::move(next);
  }
  for (int e = 0; e < tc.n_triangles(); ++e)
    if (in_patch[e]) patch.coarse_elements.push_back(e);

  for (int e : patch.coarse_elements)
    patch.fine_elements.insert(patch.fine_elements.end(),
                               hier.coarse_to_fine_elements[e].begin(),
                               hier.coarse_to_fine_elements[e].end());
  std::sort(patch.fine_elements.begin(), patch.fine_elements.end());

  // A fine node is free iff it is interior to the domain and every incident
  // fine element lies in the patch (zero extension outside the patch).
  const Triangulation& tf = hier.fine;
  std::vector<int> patch_degree(tf.n_vertices(), 0);
  for (int e : patch.fine_elements)
    for (int v : tf.triangles[e]) ++patch_degree[v];
  std::vector<int> full_degree(tf.n_vertices(), 0);
  for (int e = 0; e < tf.n_triangles(); ++e)
    for (int v : tf.triangles[e]) ++full_degree[v];
  for (int v = 0; v < tf.n_vertices(); ++v)
    if (patch_degree[v] > 0 && !tf.boundary_flags[v] && patch_degree[v] == full_degree[v])
      patch.fine_free_nodes.push_back(v);

  std::vector<std::uint8_t> node_seen(tc.n_vertices(), 0);
  for (int e : patch.coarse_elements)
    for (int v : tc.triangles[e])
      if (!tc.boundary_flags[v] && !node_seen[v]) {
        node_seen[v] = 1;
        patch.constrained_coarse_nodes.push_back(v);
      }
  std::sort(patch.constrained_coarse_nodes.begin(), patch.constrained_coarse_nodes.end());
  return patch;
}

}  // namespace lodwave
