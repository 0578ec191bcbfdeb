#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "lodwave/sparse.hpp"

namespace lodwave {

// Cholesky factorization of an SPD matrix in lower band storage. Patch
// stiffness blocks are banded once their free nodes are kept in lattice
// order, which makes a direct factor much cheaper than iterating.
class BandCholesky {
 public:
  explicit BandCholesky(const SparseMatrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("BandCholesky: square only");
    n_ = a.rows();
    bw_ = 0;
    for (int r = 0; r < n_; ++r)
      for (std::int64_t p = a.row_ptr()[r]; p < a.row_ptr()[r + 1]; ++p)
        bw_ = std::max(bw_, std::abs(r - a.col_idx()[p]));
    band_.assign(static_cast<std::size_t>(n_) * (bw_ + 1), 0.0);
    // band_[j*(bw+1) + (i-j)] holds entry (i, j) for j <= i <= j+bw
    for (int r = 0; r < n_; ++r)
      for (std::int64_t p = a.row_ptr()[r]; p < a.row_ptr()[r + 1]; ++p) {
        const int c = a.col_idx()[p];
        if (c <= r) band_[static_cast<std::size_t>(c) * (bw_ + 1) + (r - c)] = a.values()[p];
      }
    factor();
  }

  int size() const { return n_; }
  int bandwidth() const { return bw_; }

  // Solves L L^T x = b in place.
  void solve_in_place(Vector& x) const {
    if (static_cast<int>(x.size()) != n_)
      throw std::invalid_argument("BandCholesky::solve: dimension mismatch");
    for (int j = 0; j < n_; ++j) {
      const double* col = &band_[static_cast<std::size_t>(j) * (bw_ + 1)];
      const double xj = x[j] / col[0];
      x[j] = xj;
      const int imax = std::min(n_ - 1, j + bw_);
      for (int i = j + 1; i <= imax; ++i) x[i] -= col[i - j] * xj;
    }
    for (int j = n_ - 1; j >= 0; --j) {
      const double* col = &band_[static_cast<std::size_t>(j) * (bw_ + 1)];
      double s = x[j];
      const int imax = std::min(n_ - 1, j + bw_);
      for (int i = j + 1; i <= imax; ++i) s -= col[i - j] * x[i];
      x[j] = s / col[0];
    }
  }

  Vector solve(Vector b) const {
    solve_in_place(b);
    return b;
  }

 private:
  void factor() {
    const int w = bw_ + 1;
    for (int j = 0; j < n_; ++j) {
      double* col = &band_[static_cast<std::size_t>(j) * w];
      double d = col[0];
      if (!(d > 0.0)) throw std::runtime_error("BandCholesky: matrix is not positive definite");
      d = std::sqrt(d);
      col[0] = d;
      const int m = std::min(bw_, n_ - 1 - j);
      for (int i = 1; i <= m; ++i) col[i] /= d;
      for (int k = 1; k <= m; ++k) {
        const double ljk = col[k];
        if (ljk == 0.0) continue;
        double* colk = &band_[static_cast<std::size_t>(j + k) * w];
        for (int i = k; i <= m; ++i) colk[i - k] -= col[i] * ljk;
      }
    }
  }

  int n_ = 0;
  int bw_ = 0;
  std::vector<double> band_;
};

}  // namespace lodwave
