#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "lodwave/band.hpp"
#include "lodwave/dense.hpp"
#include "lodwave/sparse.hpp"

namespace lodwave {

// How the constrained patch systems  A q + C^T lambda = r,  C q = 0
// are solved. Both routes produce the A-orthogonal projection of the
// unconstrained solution onto Ker C and share the same contract.
//  - SchurCg:    outer CG on (C A^-1 C^T) with inner Jacobi-CG solves of A.
//  - BandDirect: band Cholesky of A, explicit dense Schur complement.
// BandDirect is the production default; at acceptance-scale patch sizes the
// nested CG route is an order of magnitude slower.
enum class SaddleMethod { SchurCg, BandDirect };

struct SaddleOptions {
  SaddleMethod method = SaddleMethod::BandDirect;
  double outer_tol = 1e-9;
  double inner_tol = 1e-11;
  int max_iter_factor = 10;  // max_iter = factor * n for each CG
};

namespace detail {

// Drops structurally empty constraint rows; returns the surviving rows.
inline SparseMatrix drop_zero_rows(const SparseMatrix& c) {
  std::vector<int> keep;
  for (int r = 0; r < c.rows(); ++r)
    if (c.row_ptr()[r + 1] > c.row_ptr()[r]) keep.push_back(r);
  if (static_cast<int>(keep.size()) == c.rows()) return c;
  std::vector<int> all_cols(c.cols());
  for (int j = 0; j < c.cols(); ++j) all_cols[j] = j;
  return c.submatrix(keep, all_cols);
}

}  // namespace detail

// Solves the constrained systems for every right-hand side in rhs_list.
// A must be SPD on the (patch-interior) index set; C carries the kernel
// constraints. Throws SolverError on CG breakdown and std::runtime_error on
// a rank-deficient constraint block.
inline std::vector<Vector> saddle_solve(const SparseMatrix& a, const SparseMatrix& c_in,
                                        const std::vector<Vector>& rhs_list,
                                        const SaddleOptions& opt = {}) {
  const int n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("saddle_solve: A not square");
  for (const auto& r : rhs_list)
    if (static_cast<int>(r.size()) != n)
      throw std::invalid_argument("saddle_solve: rhs dimension mismatch");
  if (c_in.cols() != n) throw std::invalid_argument("saddle_solve: C column mismatch");

  const SparseMatrix c = detail::drop_zero_rows(c_in);
  const int m = c.rows();
  const int max_iter = opt.max_iter_factor * std::max(n, 1);

  // Full row rank of C is a precondition; the Gram matrix C C^T is cheap to
  // form for the small constraint counts involved and detects violations.
  if (m > 0) {
    DenseMatrix gram(m);
    for (int i = 0; i < m; ++i) {
      Vector row(n, 0.0);
      for (std::int64_t p = c.row_ptr()[i]; p < c.row_ptr()[i + 1]; ++p)
        row[c.col_idx()[p]] = c.values()[p];
      const Vector crow = c.multiply(row);
      for (int j = 0; j < m; ++j) gram.at(i, j) = crow[j];
    }
    try {
      DenseCholesky check(gram, 1e-12);
    } catch (const std::runtime_error&) {
      throw std::runtime_error("saddle_solve: constraint matrix is rank deficient");
    }
  }

  // Unconstrained reduction when every row was empty.
  if (m == 0) {
    std::vector<Vector> out;
    out.reserve(rhs_list.size());
    for (const auto& r : rhs_list) {
      auto [x, rep] = cg_solve(a, r, opt.inner_tol, max_iter, Preconditioner::Jacobi);
      if (!rep.converged) throw SolverError("saddle_solve: unconstrained CG did not converge", rep);
      out.push_back(std::move(x));
    }
    return out;
  }

  if (opt.method == SaddleMethod::BandDirect) {
    BandCholesky chol(a);
    // X = A^-1 C^T, one backsolve per constraint row.
    std::vector<Vector> x_cols(m);
    for (int i = 0; i < m; ++i) {
      Vector ct(n, 0.0);
      for (std::int64_t p = c.row_ptr()[i]; p < c.row_ptr()[i + 1]; ++p)
        ct[c.col_idx()[p]] = c.values()[p];
      chol.solve_in_place(ct);
      x_cols[i] = std::move(ct);
    }
    DenseMatrix schur(m);
    for (int i = 0; i < m; ++i) {
      const Vector cx = c.multiply(x_cols[i]);
      for (int j = 0; j < m; ++j) schur.at(j, i) = cx[j];
    }
    // Symmetrize roundoff so the Cholesky sees an exactly symmetric matrix.
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) {
        const double v = 0.5 * (schur.at(i, j) + schur.at(j, i));
        schur.at(i, j) = v;
        schur.at(j, i) = v;
      }
    std::unique_ptr<DenseCholesky> schur_chol;
    try {
      schur_chol = std::make_unique<DenseCholesky>(schur);
    } catch (const std::runtime_error&) {
      throw std::runtime_error("saddle_solve: constraint matrix is rank deficient");
    }

    std::vector<Vector> out;
    out.reserve(rhs_list.size());
    for (const auto& r : rhs_list) {
      if (norm2(r) == 0.0) {
        out.emplace_back(n, 0.0);
        continue;
      }
      Vector y = chol.solve(r);
      const Vector lambda = schur_chol->solve(c.multiply(y));
      for (int i = 0; i < m; ++i) axpy(-lambda[i], x_cols[i], y);
      out.push_back(std::move(y));
    }
    return out;
  }

  // SchurCg route: CG on S = C A^-1 C^T without forming it.
  auto inner_solve = [&](const Vector& b) {
    auto [x, rep] = cg_solve(a, b, opt.inner_tol, max_iter, Preconditioner::Jacobi);
    if (!rep.converged) throw SolverError("saddle_solve: inner CG did not converge", rep);
    return x;
  };
  auto apply_schur = [&](const Vector& lam) {
    Vector ct(n, 0.0);
    c.multiply_transpose_add(lam, ct);
    return c.multiply(inner_solve(ct));
  };

  std::vector<Vector> out;
  out.reserve(rhs_list.size());
  for (const auto& r : rhs_list) {
    if (norm2(r) == 0.0) {
      out.emplace_back(n, 0.0);
      continue;
    }
    const Vector ainv_r = inner_solve(r);
    const Vector g = c.multiply(ainv_r);
    Vector lambda(m, 0.0);
    const double gnorm = norm2(g);
    if (gnorm > 0.0) {
      Vector res = g, p = g, sp;
      double rr = dot(res, res);
      int it = 0;
      const int outer_max = opt.max_iter_factor * m;
      double rnorm = gnorm;
      while (it < outer_max && rnorm > opt.outer_tol * gnorm) {
        sp = apply_schur(p);
        const double psp = dot(p, sp);
        if (psp <= 0.0)
          throw std::runtime_error("saddle_solve: constraint matrix is rank deficient");
        const double alpha = rr / psp;
        axpy(alpha, p, lambda);
        axpy(-alpha, sp, res);
        const double rr_new = dot(res, res);
        rnorm = std::sqrt(rr_new);
        ++it;
        if (rnorm <= opt.outer_tol * gnorm) break;
        const double beta = rr_new / rr;
        rr = rr_new;
        for (int i = 0; i < m; ++i) p[i] = res[i] + beta * p[i];
      }
      if (rnorm > opt.outer_tol * gnorm)
        throw SolverError("saddle_solve: outer Schur CG did not converge",
                          SolverReport{it, rnorm / gnorm, false});
    }
    Vector rhs_proj = r;
    Vector neg_lambda(m);
    for (int i = 0; i < m; ++i) neg_lambda[i] = -lambda[i];
    c.multiply_transpose_add(neg_lambda, rhs_proj);
    out.push_back(inner_solve(rhs_proj));
  }
  return out;
}

}  // namespace lodwave
