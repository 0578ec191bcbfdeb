#pragma once

#include <array>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "lodwave/assembly.hpp"
#include "lodwave/mesh.hpp"
#include "lodwave/sparse.hpp"

namespace lodwave {

namespace detail {

inline std::array<double, 3> barycentric(const Triangulation& tri, int element, Point2 p) {
  const auto& tr = tri.triangles[element];
  const Point2& a = tri.vertices[tr[0]];
  const Point2& b = tri.vertices[tr[1]];
  const Point2& c = tri.vertices[tr[2]];
  const double det = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  const double l1 = ((p.x - a.x) * (c.y - a.y) - (p.y - a.y) * (c.x - a.x)) / det;
  const double l2 = ((b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)) / det;
  return {1.0 - l1 - l2, l1, l2};
}

}  // namespace detail

// Fine-mesh nodal representation of every interior coarse hat function.
// Coarse hats are piecewise linear on the fine mesh, so the representation is
// exact. Indexed by the dense interior coarse node numbering.
inline std::vector<SparseVector> embed_coarse_basis(const MeshHierarchy& hier) {
  const Triangulation& tc = hier.coarse;
  const Triangulation& tf = hier.fine;
  std::vector<std::vector<std::pair<int, double>>> entries(tc.n_interior());
  for (int e = 0; e < tc.n_triangles(); ++e) {
    const auto& corners = tc.triangles[e];
    std::array<int, 3> rows;
    for (int c = 0; c < 3; ++c) rows[c] = tc.interior_node_index[corners[c]];
    for (int fe : hier.coarse_to_fine_elements[e])
      for (int v : tf.triangles[fe]) {
        const auto lambda = detail::barycentric(tc, e, tf.vertices[v]);
        for (int c = 0; c < 3; ++c)
          if (rows[c] >= 0 && lambda[c] != 0.0) entries[rows[c]].emplace_back(v, lambda[c]);
      }
  }
  std::vector<SparseVector> basis(tc.n_interior());
  for (int z = 0; z < tc.n_interior(); ++z) {
    auto& pairs = entries[z];
    std::sort(pairs.begin(), pairs.end());
    // duplicates from shared fine nodes carry identical values
    pairs.erase(std::unique(pairs.begin(), pairs.end(),
                            [](const auto& a, const auto& b) { return a.first == b.first; }),
                pairs.end());
    basis[z].idx.reserve(pairs.size());
    basis[z].val.reserve(pairs.size());
    for (const auto& [v, val] : pairs) {
      basis[z].idx.push_back(v);
      basis[z].val.push_back(val);
    }
  }
  return basis;
}

// Weighted Clement-type quasi-interpolation
//   I_H(v) = sum_z v_z Phi_z,  v_z = (v, Phi_z) / (1, Phi_z),
// realized entirely through the mixed coarse-fine mass matrix
//   mixed(z, x) = (lambda_x, Phi_z)_{L2}.
// Rows run over interior coarse nodes, columns over all fine vertices; the
// weights integrate Phi_z over its full support.
struct ClementOperator {
  SparseMatrix mixed;                  // n_coarse_interior x n_fine_vertices
  Vector weights;                      // (1, Phi_z) per row
  std::vector<SparseVector> basis;     // fine representation of Phi_z per row
  std::vector<int> coarse_nodes;       // coarse vertex id per row
};

inline ClementOperator build_clement(const MeshHierarchy& hier) {
  ClementOperator op;
  op.basis = embed_coarse_basis(hier);
  op.coarse_nodes = hier.coarse.interior_nodes;
  const SparseMatrix mass_full = assemble_mass(hier.fine);
  const int nf = hier.fine.n_vertices();
  const int nz = hier.coarse.n_interior();

  std::vector<std::tuple<int, int, double>> trip;
  op.weights.assign(nz, 0.0);
  Vector scratch(nf, 0.0);
  std::vector<int> dirty;
  for (int z = 0; z < nz; ++z) {
    const SparseVector& phi = op.basis[z];
    for (std::size_t i = 0; i < phi.size(); ++i) {
      const int c = phi.idx[i];
      const double v = phi.val[i];
      for (std::int64_t p = mass_full.row_ptr()[c]; p < mass_full.row_ptr()[c + 1]; ++p) {
        const int r = mass_full.col_idx()[p];
        if (scratch[r] == 0.0) dirty.push_back(r);
        scratch[r] += mass_full.values()[p] * v;
      }
    }
    std::sort(dirty.begin(), dirty.end());
    double w = 0.0;
    for (int r : dirty) {
      trip.emplace_back(z, r, scratch[r]);
      w += scratch[r];
      scratch[r] = 0.0;
    }
    dirty.clear();
    op.weights[z] = w;
    if (!(w > 0.0)) throw std::runtime_error("build_clement: non-positive weight");
  }
  op.mixed = SparseMatrix::from_triplets(nz, nf, std::move(trip));
  return op;
}

// I_H applied to a full fine nodal vector; returns the interior coarse
// coefficients v_z.
inline Vector apply_IH(const ClementOperator& op, const Vector& v_fine) {
  if (static_cast<int>(v_fine.size()) != op.mixed.cols())
    throw std::invalid_argument("apply_IH: dimension mismatch");
  Vector out = op.mixed.multiply(v_fine);
  for (std::size_t z = 0; z < out.size(); ++z) out[z] /= op.weights[z];
  return out;
}

inline Vector apply_IH(const ClementOperator& op, const SparseVector& v_fine) {
  return apply_IH(op, v_fine.to_dense(op.mixed.cols()));
}

// Kernel constraints of I_H restricted to a patch: rows are the patch's
// constrained coarse nodes, columns its free fine nodes, entries copied from
// the mixed mass matrix. Rows that lose all entries under the restriction are
// dropped.
inline SparseMatrix constraint_matrix(const ClementOperator& op, const MeshHierarchy& hier,
                                      const Patch& patch) {
  std::vector<int> rows;
  rows.reserve(patch.constrained_coarse_nodes.size());
  for (int z : patch.constrained_coarse_nodes) {
    const int r = hier.coarse.interior_node_index[z];
    if (r < 0) throw std::logic_error("constraint_matrix: boundary node constrained");
    rows.push_back(r);
  }
  SparseMatrix c = op.mixed.submatrix(rows, patch.fine_free_nodes);
  std::vector<int> keep;
  for (int r = 0; r < c.rows(); ++r)
    if (c.row_ptr()[r + 1] > c.row_ptr()[r]) keep.push_back(r);
  if (static_cast<int>(keep.size()) == c.rows()) return c;
  std::vector<int> all_cols(c.cols());
  for (int j = 0; j < c.cols(); ++j) all_cols[j] = j;
  return c.submatrix(keep, all_cols);
}

}  // namespace lodwave
