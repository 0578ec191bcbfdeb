#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "lodwave/dense.hpp"

namespace lodwave {

// Compressed sparse row matrix. Column indices are strictly increasing within
// each row and duplicates have been summed during compression.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::int64_t nnz() const { return static_cast<std::int64_t>(vals_.size()); }

  const std::vector<std::int64_t>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return vals_; }

  static SparseMatrix from_triplets(int rows, int cols,
                                    std::vector<std::tuple<int, int, double>> trip) {
    std::sort(trip.begin(), trip.end(), [](const auto& a, const auto& b) {
      if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
      return std::get<1>(a) < std::get<1>(b);
    });
    SparseMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.row_ptr_.assign(rows + 1, 0);
    m.col_idx_.reserve(trip.size());
    m.vals_.reserve(trip.size());
    for (std::size_t i = 0; i < trip.size();) {
      const int r = std::get<0>(trip[i]);
      const int c = std::get<1>(trip[i]);
      double v = 0.0;
      while (i < trip.size() && std::get<0>(trip[i]) == r && std::get<1>(trip[i]) == c) {
        v += std::get<2>(trip[i]);
        ++i;
      }
      m.col_idx_.push_back(c);
      m.vals_.push_back(v);
      ++m.row_ptr_[r + 1];
    }
    for (int r = 0; r < rows; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
    return m;
  }

  void multiply(const Vector& x, Vector& y) const {
    if (static_cast<int>(x.size()) != cols_)
      throw std::invalid_argument("SparseMatrix::multiply: dimension mismatch");
    y.assign(rows_, 0.0);
    for (int r = 0; r < rows_; ++r) {
      double s = 0.0;
      for (std::int64_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p)
        s += vals_[p] * x[col_idx_[p]];
      y[r] = s;
    }
  }

  Vector multiply(const Vector& x) const {
    Vector y;
    multiply(x, y);
    return y;
  }

  // y += A^T x, using the CSR rows as columns of the transpose.
  void multiply_transpose_add(const Vector& x, Vector& y) const {
    for (int r = 0; r < rows_; ++r) {
      const double xr = x[r];
      if (xr == 0.0) continue;
      for (std::int64_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p)
        y[col_idx_[p]] += vals_[p] * xr;
    }
  }

  Vector diagonal() const {
    Vector d(std::min(rows_, cols_), 0.0);
    for (int r = 0; r < static_cast<int>(d.size()); ++r)
      for (std::int64_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p)
        if (col_idx_[p] == r) d[r] = vals_[p];
    return d;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : vals_) m = std::max(m, std::abs(v));
    return m;
  }

  // max_ij |A_ij - A_ji|; requires a square matrix.
  double max_asymmetry() const {
    double m = 0.0;
    for (int r = 0; r < rows_; ++r)
      for (std::int64_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
        const int c = col_idx_[p];
        double vt = 0.0;
        for (std::int64_t q = row_ptr_[c]; q < row_ptr_[c + 1]; ++q)
          if (col_idx_[q] == r) {
            vt = vals_[q];
            break;
          }
        m = std::max(m, std::abs(vals_[p] - vt));
      }
    return m;
  }

  // Extracts the submatrix with the given row/column index sets. The index
  // lists must be sorted and duplicate free; entries outside them are dropped.
  SparseMatrix submatrix(const std::vector<int>& keep_rows,
                         const std::vector<int>& keep_cols) const {
    std::vector<int> col_map(cols_, -1);
    for (std::size_t j = 0; j < keep_cols.size(); ++j) col_map[keep_cols[j]] = static_cast<int>(j);
    std::vector<std::tuple<int, int, double>> trip;
    for (std::size_t i = 0; i < keep_rows.size(); ++i) {
      const int r = keep_rows[i];
      for (std::int64_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
        const int c = col_map[col_idx_[p]];
        if (c >= 0) trip.emplace_back(static_cast<int>(i), c, vals_[p]);
      }
    }
    return from_triplets(static_cast<int>(keep_rows.size()),
                         static_cast<int>(keep_cols.size()), std::move(trip));
  }

  DenseMatrix to_dense() const {
    if (rows_ != cols_) throw std::invalid_argument("to_dense: square matrices only");
    DenseMatrix d(rows_);
    for (int r = 0; r < rows_; ++r)
      for (std::int64_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p)
        d.at(r, col_idx_[p]) = vals_[p];
    return d;
  }

  // Debug dump in MatrixMarket coordinate format (1-based indices).
  void write_matrix_market(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << rows_ << " " << cols_ << " " << nnz() << "\n";
    out.precision(17);
    for (int r = 0; r < rows_; ++r)
      for (std::int64_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p)
        out << r + 1 << " " << col_idx_[p] + 1 << " " << vals_[p] << "\n";
  }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<std::int64_t> row_ptr_{0};
  std::vector<int> col_idx_;
  std::vector<double> vals_;
};

// Sorted-index sparse vector over a global index set. Correctors and
// multiscale basis functions are stored this way; their support is a small
// union of patches compared to the fine mesh.
struct SparseVector {
  std::vector<int> idx;
  std::vector<double> val;

  std::size_t size() const { return idx.size(); }

  double dot_dense(const Vector& x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i) s += val[i] * x[idx[i]];
    return s;
  }

  void add_to_dense(Vector& x, double scale = 1.0) const {
    for (std::size_t i = 0; i < idx.size(); ++i) x[idx[i]] += scale * val[i];
  }

  Vector to_dense(int n) const {
    Vector x(n, 0.0);
    add_to_dense(x);
    return x;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : val) m = std::max(m, std::abs(v));
    return m;
  }

  // Merges two sorted sparse vectors, summing shared indices.
  static SparseVector sum(const SparseVector& a, const SparseVector& b) {
    SparseVector r;
    r.idx.reserve(a.size() + b.size());
    r.val.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
      if (j == b.size() || (i < a.size() && a.idx[i] < b.idx[j])) {
        r.idx.push_back(a.idx[i]);
        r.val.push_back(a.val[i]);
        ++i;
      } else if (i == a.size() || b.idx[j] < a.idx[i]) {
        r.idx.push_back(b.idx[j]);
        r.val.push_back(b.val[j]);
        ++j;
      } else {
        r.idx.push_back(a.idx[i]);
        r.val.push_back(a.val[i] + b.val[j]);
        ++i;
        ++j;
      }
    }
    return r;
  }
};

inline double dot_sparse(const SparseVector& a, const SparseVector& b) {
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a.idx[i] < b.idx[j])
      ++i;
    else if (b.idx[j] < a.idx[i])
      ++j;
    else {
      s += a.val[i] * b.val[j];
      ++i;
      ++j;
    }
  }
  return s;
}

struct SolverReport {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

enum class Preconditioner { None, Jacobi };

// Thrown when a solve that the caller cannot sensibly continue from fails.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, SolverReport report)
      : std::runtime_error(what), report(report) {}
  SolverReport report;
};

// Preconditioned conjugate gradients for SPD systems. Stops when
// ||b - A x||_2 <= tol * ||b||_2; b = 0 returns x = 0 immediately.
// Non-convergence is reported, not thrown: the best iterate is returned.
inline std::pair<Vector, SolverReport> cg_solve(
    const SparseMatrix& a, const Vector& b, double tol, int max_iter,
    Preconditioner precond = Preconditioner::Jacobi,
    const std::function<void(int, const Vector&)>& observer = nullptr) {
  if (a.rows() != a.cols()) throw std::invalid_argument("cg_solve: matrix not square");
  if (a.rows() != static_cast<int>(b.size()))
    throw std::invalid_argument("cg_solve: dimension mismatch");
  if (!(tol > 0.0)) throw std::invalid_argument("cg_solve: tol must be positive");

  const int n = a.rows();
  const double bnorm = norm2(b);
  Vector x(n, 0.0);
  if (bnorm == 0.0) return {x, SolverReport{0, 0.0, true}};

  Vector inv_diag;
  if (precond == Preconditioner::Jacobi) {
    inv_diag = a.diagonal();
    for (double& d : inv_diag) {
      if (d == 0.0) throw std::invalid_argument("cg_solve: zero diagonal under Jacobi");
      d = 1.0 / d;
    }
  }
  auto apply_precond = [&](const Vector& r, Vector& z) {
    if (precond == Preconditioner::None) {
      z = r;
    } else {
      z.resize(r.size());
      for (std::size_t i = 0; i < r.size(); ++i) z[i] = inv_diag[i] * r[i];
    }
  };

  Vector r = b, z, p, ap;
  apply_precond(r, z);
  p = z;
  double rz = dot(r, z);
  double rnorm = bnorm;
  int it = 0;
  while (it < max_iter && rnorm > tol * bnorm) {
    a.multiply(p, ap);
    const double pap = dot(p, ap);
    if (pap <= 0.0) break;  // loss of positive definiteness
    const double alpha = rz / pap;
    axpy(alpha, p, x);
    axpy(-alpha, ap, r);
    rnorm = norm2(r);
    ++it;
    if (observer) observer(it, x);
    if (rnorm <= tol * bnorm) break;
    apply_precond(r, z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  return {x, SolverReport{it, rnorm / bnorm, rnorm <= tol * bnorm}};
}

}  // namespace lodwave
