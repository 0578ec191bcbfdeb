#pragma once

// Test-only reference implementations, kept independent of the library code
// paths they are used to check.

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "lodwave/dense.hpp"
#include "lodwave/mesh.hpp"
#include "lodwave/sparse.hpp"

namespace oracles {

using lodwave::DenseMatrix;
using lodwave::SparseMatrix;
using lodwave::Vector;

// Dense LU with partial pivoting; handles the indefinite KKT blocks.
inline Vector lu_solve(DenseMatrix a, Vector b) {
  const int n = a.size();
  std::vector<int> piv(n);
  for (int i = 0; i < n; ++i) piv[i] = i;
  for (int col = 0; col < n; ++col) {
    int best = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a.at(r, col)) > std::abs(a.at(best, col))) best = r;
    if (a.at(best, col) == 0.0) throw std::runtime_error("lu_solve: singular matrix");
    if (best != col) {
      for (int j = 0; j < n; ++j) std::swap(a.at(col, j), a.at(best, j));
      std::swap(b[col], b[best]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = a.at(r, col) / a.at(col, col);
      a.at(r, col) = f;
      for (int j = col + 1; j < n; ++j) a.at(r, j) -= f * a.at(col, j);
      b[r] -= f * b[col];
    }
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= a.at(i, j) * b[j];
    b[i] = s / a.at(i, i);
  }
  return b;
}

// Solves the full KKT system [A C^T; C 0] [q; lambda] = [r; 0] densely and
// returns q.
inline Vector kkt_solve(const SparseMatrix& a, const SparseMatrix& c, const Vector& r) {
  const int n = a.rows();
  const int m = c.rows();
  DenseMatrix kkt(n + m);
  for (int row = 0; row < n; ++row)
    for (auto p = a.row_ptr()[row]; p < a.row_ptr()[row + 1]; ++p)
      kkt.at(row, a.col_idx()[p]) = a.values()[p];
  for (int row = 0; row < m; ++row)
    for (auto p = c.row_ptr()[row]; p < c.row_ptr()[row + 1]; ++p) {
      kkt.at(n + row, c.col_idx()[p]) = c.values()[p];
      kkt.at(c.col_idx()[p], n + row) = c.values()[p];
    }
  Vector rhs(n + m, 0.0);
  for (int i = 0; i < n; ++i) rhs[i] = r[i];
  Vector sol = lu_solve(kkt, rhs);
  sol.resize(n);
  return sol;
}

inline SparseMatrix random_spd(int n, std::mt19937& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  DenseMatrix b(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b.at(i, j) = dist(rng);
  std::vector<std::tuple<int, int, double>> trip;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += b.at(k, i) * b.at(k, j);
      if (i == j) s += n;
      trip.emplace_back(i, j, s);
    }
  return SparseMatrix::from_triplets(n, n, std::move(trip));
}

inline SparseMatrix random_constraints(int m, int n, std::mt19937& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<std::tuple<int, int, double>> trip;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) trip.emplace_back(i, j, dist(rng));
  return SparseMatrix::from_triplets(m, n, std::move(trip));
}

inline Vector random_vector(int n, std::mt19937& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

// Edge-midpoint quadrature on a triangle, exact for quadratic integrands.
template <class Fn>
double quad_midpoint_rule(const lodwave::Triangulation& tri, int element, const Fn& f) {
  const auto& tr = tri.triangles[element];
  const auto& a = tri.vertices[tr[0]];
  const auto& b = tri.vertices[tr[1]];
  const auto& c = tri.vertices[tr[2]];
  const double area = tri.signed_area(element);
  double s = f(0.5 * (a.x + b.x), 0.5 * (a.y + b.y));
  s += f(0.5 * (b.x + c.x), 0.5 * (b.y + c.y));
  s += f(0.5 * (c.x + a.x), 0.5 * (c.y + a.y));
  return area * s / 3.0;
}

// Brute-force one-layer dilation: every coarse element sharing at least one
// vertex with a member of the set.
inline std::set<int> dilate_by_vertex(const lodwave::Triangulation& tri,
                                      const std::set<int>& elements) {
  std::set<int> out = elements;
  for (int e = 0; e < tri.n_triangles(); ++e) {
    for (int member : elements) {
      int shared = 0;
      for (int v : tri.triangles[e])
        for (int w : tri.triangles[member])
          if (v == w) ++shared;
      if (shared > 0) {
        out.insert(e);
        break;
      }
    }
  }
  return out;
}

}  // namespace oracles
