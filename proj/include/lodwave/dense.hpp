#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace lodwave {

using Vector = std::vector<double>;

inline double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

inline void axpy(double alpha, const Vector& x, Vector& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline double norm_inf(const Vector& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// Small dense symmetric matrix, row-major. Used for the coarse multiscale
// systems and the Schur complements of constrained patch solves.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  explicit DenseMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0.0) {}

  int size() const { return n_; }
  double& at(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  double at(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }

  Vector multiply(const Vector& x) const {
    Vector y(n_, 0.0);
    for (int i = 0; i < n_; ++i) {
      const double* row = &a_[static_cast<std::size_t>(i) * n_];
      double s = 0.0;
      for (int j = 0; j < n_; ++j) s += row[j] * x[j];
      y[i] = s;
    }
    return y;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : a_) m = std::max(m, std::abs(v));
    return m;
  }

  double max_asymmetry() const {
    double m = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j) m = std::max(m, std::abs(at(i, j) - at(j, i)));
    return m;
  }

 private:
  int n_ = 0;
  std::vector<double> a_;
};

// Lower-triangular Cholesky factor of an SPD dense matrix.
// Construction throws if the matrix is not numerically positive definite;
// min_pivot_rel > 0 additionally rejects pivots that are tiny relative to the
// largest diagonal entry (near rank deficiency).
class DenseCholesky {
 public:
  DenseCholesky() = default;

  explicit DenseCholesky(const DenseMatrix& a, double min_pivot_rel = 0.0)
      : n_(a.size()), l_(a) {
    double max_diag = 0.0;
    for (int j = 0; j < n_; ++j) max_diag = std::max(max_diag, a.at(j, j));
    const double floor = min_pivot_rel * max_diag;
    for (int j = 0; j < n_; ++j) {
      double d = l_.at(j, j);
      for (int k = 0; k < j; ++k) d -= l_.at(j, k) * l_.at(j, k);
      if (!(d > 0.0) || d <= floor)
        throw std::runtime_error("DenseCholesky: matrix is not positive definite");
      d = std::sqrt(d);
      l_.at(j, j) = d;
      for (int i = j + 1; i < n_; ++i) {
        double s = l_.at(i, j);
        for (int k = 0; k < j; ++k) s -= l_.at(i, k) * l_.at(j, k);
        l_.at(i, j) = s / d;
      }
    }
  }

  int size() const { return n_; }

  Vector solve(const Vector& b) const {
    if (static_cast<int>(b.size()) != n_)
      throw std::invalid_argument("DenseCholesky::solve: dimension mismatch");
    Vector x = b;
    for (int i = 0; i < n_; ++i) {
      double s = x[i];
      for (int k = 0; k < i; ++k) s -= l_.at(i, k) * x[k];
      x[i] = s / l_.at(i, i);
    }
    for (int i = n_ - 1; i >= 0; --i) {
      double s = x[i];
      for (int k = i + 1; k < n_; ++k) s -= l_.at(k, i) * x[k];
      x[i] = s / l_.at(i, i);
    }
    return x;
  }

 private:
  int n_ = 0;
  DenseMatrix l_;
};

}  // namespace lodwave
