#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lodwave/mesh.hpp"
#include "lodwave/sparse.hpp"

namespace lodwave {

// Piecewise constant wave-speed coefficient, one value per fine element.
struct CoefficientField {
  std::vector<double> values;

  static CoefficientField constant(int n_elements, double value) {
    return CoefficientField{std::vector<double>(n_elements, value)};
  }
  double min() const {
    double m = values.empty() ? 0.0 : values[0];
    for (double v : values) m = std::min(m, v);
    return m;
  }
  double max() const {
    double m = values.empty() ? 0.0 : values[0];
    for (double v : values) m = std::max(m, v);
    return m;
  }
};

using ScalarField = std::function<double(double, double)>;
using SpaceTimeField = std::function<double(double, double, double)>;

// Midpoint sampling of the coefficient: a_T = coef(barycenter of T).
inline CoefficientField sample_coefficient(const ScalarField& coef, const Triangulation& tri) {
  CoefficientField field;
  field.values.resize(tri.n_triangles());
  for (int t = 0; t < tri.n_triangles(); ++t) {
    const Point2 b = tri.barycenter(t);
    const double v = coef(b.x, b.y);
    if (!(v > 0.0))
      throw std::runtime_error("sample_coefficient: non-positive value at element " +
                               std::to_string(t));
    field.values[t] = v;
  }
  return field;
}

namespace detail {

struct P1Gradients {
  double area;
  std::array<double, 3> gx, gy;
};

inline P1Gradients p1_gradients(const Triangulation& tri, int t) {
  const auto& tr = tri.triangles[t];
  const Point2& a = tri.vertices[tr[0]];
  const Point2& b = tri.vertices[tr[1]];
  const Point2& c = tri.vertices[tr[2]];
  const double det = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  P1Gradients g;
  g.area = 0.5 * det;
  g.gx = {(b.y - c.y) / det, (c.y - a.y) / det, (a.y - b.y) / det};
  g.gy = {(c.x - b.x) / det, (a.x - c.x) / det, (b.x - a.x) / det};
  return g;
}

}  // namespace detail

// Stiffness matrix sum_T a_T int_T grad(l_j) . grad(l_i) over all vertices
// (no boundary condition applied). P1 gradients are constant per element, so
// the per-element integral is exact.
inline SparseMatrix assemble_stiffness(const Triangulation& tri, const CoefficientField& field) {
  if (static_cast<int>(field.values.size()) != tri.n_triangles())
    throw std::invalid_argument("assemble_stiffness: field size mismatch");
  std::vector<std::tuple<int, int, double>> trip;
  trip.reserve(9u * tri.n_triangles());
  for (int t = 0; t < tri.n_triangles(); ++t) {
    const auto g = detail::p1_gradients(tri, t);
    const double scale = field.values[t] * g.area;
    const auto& tr = tri.triangles[t];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trip.emplace_back(tr[i], tr[j], scale * (g.gx[i] * g.gx[j] + g.gy[i] * g.gy[j]));
  }
  return SparseMatrix::from_triplets(tri.n_vertices(), tri.n_vertices(), std::move(trip));
}

inline SparseMatrix assemble_stiffness_unit(const Triangulation& tri) {
  return assemble_stiffness(tri, CoefficientField::constant(tri.n_triangles(), 1.0));
}

// Mass matrix with the exact P1 local rule |T|/12 (1 + delta_ij).
inline SparseMatrix assemble_mass(const Triangulation& tri) {
  std::vector<std::tuple<int, int, double>> trip;
  trip.reserve(9u * tri.n_triangles());
  for (int t = 0; t < tri.n_triangles(); ++t) {
    const double area = tri.signed_area(t);
    const auto& tr = tri.triangles[t];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trip.emplace_back(tr[i], tr[j], area / 12.0 * (i == j ? 2.0 : 1.0));
  }
  return SparseMatrix::from_triplets(tri.n_vertices(), tri.n_vertices(), std::move(trip));
}

// Load vector with one-point barycentric quadrature,
// b_i = sum_T |T| F(barycenter(T), t) / 3 for each vertex i of T.
inline Vector assemble_load(const Triangulation& tri, const SpaceTimeField& source, double t) {
  Vector b(tri.n_vertices(), 0.0);
  for (int e = 0; e < tri.n_triangles(); ++e) {
    const Point2 bc = tri.barycenter(e);
    const double w = tri.signed_area(e) * source(bc.x, bc.y, t) / 3.0;
    for (int v : tri.triangles[e]) b[v] += w;
  }
  return b;
}

// Restriction of a full-vertex matrix to the interior degrees of freedom
// (homogeneous Dirichlet elimination).
inline SparseMatrix restrict_to_interior(const SparseMatrix& full, const Triangulation& tri) {
  return full.submatrix(tri.interior_nodes, tri.interior_nodes);
}

inline Vector gather_interior(const Vector& full, const Triangulation& tri) {
  Vector v(tri.n_interior());
  for (int i = 0; i < tri.n_interior(); ++i) v[i] = full[tri.interior_nodes[i]];
  return v;
}

inline Vector scatter_interior(const Vector& interior, const Triangulation& tri) {
  Vector v(tri.n_vertices(), 0.0);
  for (int i = 0; i < tri.n_interior(); ++i) v[tri.interior_nodes[i]] = interior[i];
  return v;
}

// Interior-restricted operators of the fine problem plus the full-vertex
// matrices needed for norms, kernel constraints and load evaluation.
struct FineOperators {
  SparseMatrix stiffness;        // a-weighted, interior
  SparseMatrix unit_stiffness;   // a == 1, interior
  SparseMatrix mass;             // interior
  SparseMatrix stiffness_full;   // a-weighted, all vertices
  SparseMatrix unit_stiffness_full;
  SparseMatrix mass_full;
};

inline FineOperators build_fine_operators(const Triangulation& tri,
                                          const CoefficientField& field) {
  FineOperators ops;
  ops.stiffness_full = assemble_stiffness(tri, field);
  ops.unit_stiffness_full = assemble_stiffness_unit(tri);
  ops.mass_full = assemble_mass(tri);
  ops.stiffness = restrict_to_interior(ops.stiffness_full, tri);
  ops.unit_stiffness = restrict_to_interior(ops.unit_stiffness_full, tri);
  ops.mass = restrict_to_interior(ops.mass_full, tri);
  return ops;
}

// Pointwise nodal interpolation onto the fine mesh, zero on the boundary.
inline Vector interpolate_nodal(const Triangulation& tri, const ScalarField& f) {
  Vector v(tri.n_vertices(), 0.0);
  for (int i = 0; i < tri.n_vertices(); ++i)
    if (!tri.boundary_flags[i]) v[i] = f(tri.vertices[i].x, tri.vertices[i].y);
  return v;
}

}  // namespace lodwave
