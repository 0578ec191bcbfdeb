#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lodwave/assembly.hpp"
#include "lodwave/correctors.hpp"
#include "lodwave/dense.hpp"
#include "lodwave/sparse.hpp"

namespace lodwave {

// Coefficients of the initial data in the multiscale basis: f_bar represents
// the projection of u(.,0), g_bar the projection of du/dt(.,0).
struct InitialData {
  Vector f_bar;
  Vector g_bar;
};

// Time-indexed coefficient vectors. xi is the displacement; eta is the
// Crank-Nicolson velocity variable (empty for the plain Newmark recurrence).
struct Trajectory {
  double dt = 0.0;
  std::vector<Vector> xi;
  std::vector<Vector> eta;

  int steps() const { return static_cast<int>(xi.size()) - 1; }
};

// Elliptic projection onto the multiscale space: solves S_k c = r with
// r_i = psi_i^T A_h f; the result represents pi^ms(f) = sum c_i psi_i.
inline Vector project_initial_elliptic(const MultiscaleSystem& ms, const CorrectorBasis& basis,
                                       const SparseMatrix& stiffness_full,
                                       const Vector& f_fine_full) {
  const Vector af = stiffness_full.multiply(f_fine_full);
  Vector r(basis.psi.size());
  for (std::size_t i = 0; i < basis.psi.size(); ++i) r[i] = basis.psi[i].dot_dense(af);
  return DenseCholesky(ms.stiffness).solve(r);
}

// L2 projection onto the multiscale space: M_k c = r with r_i = psi_i^T M_h g.
inline Vector project_initial_l2(const MultiscaleSystem& ms, const CorrectorBasis& basis,
                                 const SparseMatrix& mass_full, const Vector& g_fine_full) {
  const Vector mg = mass_full.multiply(g_fine_full);
  Vector r(basis.psi.size());
  for (std::size_t i = 0; i < basis.psi.size(); ++i) r[i] = basis.psi[i].dot_dense(mg);
  return DenseCholesky(ms.mass).solve(r);
}

// Crank-Nicolson two-field update,
//   (dt^2/4 S + M) eta_n = (M - dt^2/4 S) eta_{n-1} - dt S xi_{n-1} + dt G_n,
//   xi_n = xi_{n-1} + dt/2 (eta_n + eta_{n-1}),
// with the trapezoidal load G_n = (G(t_n) + G(t_{n-1})) / 2. The system
// matrix is handled by solve_system, built once by the caller.
template <class ApplyS, class ApplyM, class SolveSystem>
Trajectory crank_nicolson_run(const ApplyS& apply_S, const ApplyM& apply_M,
                              const std::function<Vector(double)>& load, const Vector& xi0,
                              const Vector& eta0, double dt, int steps,
                              const SolveSystem& solve_system) {
  if (steps < 1) throw std::invalid_argument("crank_nicolson_run: steps >= 1");
  const std::size_t n = xi0.size();
  Trajectory traj;
  traj.dt = dt;
  traj.xi.reserve(steps + 1);
  traj.eta.reserve(steps + 1);
  traj.xi.push_back(xi0);
  traj.eta.push_back(eta0);
  Vector g_prev = load(0.0);
  for (int step = 1; step <= steps; ++step) {
    const Vector& xi_prev = traj.xi.back();
    const Vector& eta_prev = traj.eta.back();
    Vector g_now = load(step * dt);
    Vector rhs = apply_M(eta_prev);
    const Vector s_eta = apply_S(eta_prev);
    const Vector s_xi = apply_S(xi_prev);
    for (std::size_t i = 0; i < n; ++i)
      rhs[i] += -0.25 * dt * dt * s_eta[i] - dt * s_xi[i] + 0.5 * dt * (g_now[i] + g_prev[i]);
    Vector eta;
    try {
      eta = solve_system(rhs);
    } catch (const std::exception& e) {
      throw std::runtime_error("crank_nicolson_run: step " + std::to_string(step) + ": " +
                               e.what());
    }
    Vector xi = xi_prev;
    for (std::size_t i = 0; i < n; ++i) xi[i] += 0.5 * dt * (eta[i] + eta_prev[i]);
    traj.xi.push_back(std::move(xi));
    traj.eta.push_back(std::move(eta));
    g_prev = std::move(g_now);
  }
  return traj;
}

// Dense coarse realization; (dt^2/4 S + M) is Cholesky factored once.
inline Trajectory crank_nicolson_dense(const DenseMatrix& S, const DenseMatrix& M,
                                       const std::function<Vector(double)>& load,
                                       const InitialData& init, double dt, int steps) {
  const int n = S.size();
  DenseMatrix system(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) system.at(i, j) = M.at(i, j) + 0.25 * dt * dt * S.at(i, j);
  const DenseCholesky chol(system);
  return crank_nicolson_run([&](const Vector& x) { return S.multiply(x); },
                            [&](const Vector& x) { return M.multiply(x); }, load, init.f_bar,
                            init.g_bar, dt, steps,
                            [&](const Vector& b) { return chol.solve(b); });
}

// Sparse realization for the fine reference problem; the CN system is solved
// with Jacobi-preconditioned CG each step.
inline Trajectory crank_nicolson_sparse(const SparseMatrix& S, const SparseMatrix& M,
                                        const std::function<Vector(double)>& load,
                                        const Vector& xi0, const Vector& eta0, double dt,
                                        int steps, double tol = 1e-10) {
  std::vector<std::tuple<int, int, double>> trip;
  for (int r = 0; r < M.rows(); ++r)
    for (std::int64_t p = M.row_ptr()[r]; p < M.row_ptr()[r + 1]; ++p)
      trip.emplace_back(r, M.col_idx()[p], M.values()[p]);
  for (int r = 0; r < S.rows(); ++r)
    for (std::int64_t p = S.row_ptr()[r]; p < S.row_ptr()[r + 1]; ++p)
      trip.emplace_back(r, S.col_idx()[p], 0.25 * dt * dt * S.values()[p]);
  const SparseMatrix system = SparseMatrix::from_triplets(M.rows(), M.cols(), std::move(trip));
  const int max_iter = 10 * std::max(1, system.rows());
  auto solve = [&](const Vector& b) {
    auto [x, rep] = cg_solve(system, b, tol, max_iter, Preconditioner::Jacobi);
    if (!rep.converged) throw SolverError("CN system CG did not converge", rep);
    return x;
  };
  return crank_nicolson_run([&](const Vector& x) { return S.multiply(x); },
                            [&](const Vector& x) { return M.multiply(x); }, load, xi0, eta0, dt,
                            steps, solve);
}

// General Newmark three-term recurrence,
//   dt^-2 M (xi^{n+1} - 2 xi^n + xi^{n-1})
//     + 1/2 S (2 bh xi^{n+1} + (1 - 4 bh + 2 gh) xi^n + (1 + 2 bh - 2 gh) xi^{n-1}) = G^n,
// given the two starting vectors. loads[n-1] supplies G^n for n = 1..steps-1.
inline Trajectory newmark_run(const DenseMatrix& S, const DenseMatrix& M,
                              const std::vector<Vector>& loads, const Vector& xi0,
                              const Vector& xi1, double beta_hat, double gamma_hat, double dt,
                              int steps) {
  if (beta_hat < 0.0) throw std::invalid_argument("newmark_run: beta_hat >= 0");
  if (steps < 1) throw std::invalid_argument("newmark_run: steps >= 1");
  if (static_cast<int>(loads.size()) < steps - 1)
    throw std::invalid_argument("newmark_run: missing load vectors");
  const int n = S.size();
  DenseMatrix system(n);
  const double idt2 = 1.0 / (dt * dt);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) system.at(i, j) = idt2 * M.at(i, j) + beta_hat * S.at(i, j);
  const DenseCholesky chol(system);

  const double w_mid = 0.5 * (1.0 - 4.0 * beta_hat + 2.0 * gamma_hat);
  const double w_old = 0.5 * (1.0 + 2.0 * beta_hat - 2.0 * gamma_hat);

  Trajectory traj;
  traj.dt = dt;
  traj.xi.reserve(steps + 1);
  traj.xi.push_back(xi0);
  traj.xi.push_back(xi1);
  for (int step = 1; step < steps; ++step) {
    const Vector& now = traj.xi[step];
    const Vector& old = traj.xi[step - 1];
    Vector tmp(n);
    for (int i = 0; i < n; ++i) tmp[i] = 2.0 * now[i] - old[i];
    Vector rhs = M.multiply(tmp);
    for (int i = 0; i < n; ++i) rhs[i] *= idt2;
    const Vector s_now = S.multiply(now);
    const Vector s_old = S.multiply(old);
    const Vector& g = loads[step - 1];
    for (int i = 0; i < n; ++i) rhs[i] += g[i] - w_mid * s_now[i] - w_old * s_old[i];
    Vector next;
    try {
      next = chol.solve(rhs);
    } catch (const std::exception& e) {
      throw std::runtime_error("newmark_run: step " + std::to_string(step + 1) + ": " + e.what());
    }
    traj.xi.push_back(std::move(next));
  }
  return traj;
}

// Crank-Nicolson reference solution on the fine mesh: nodal initial data,
// interior restricted operators, per-step CG solves.
inline Trajectory reference_solve(const FineOperators& ops, const Triangulation& fine,
                                  const SpaceTimeField& source, const ScalarField& f,
                                  const ScalarField& g, double dt, int steps,
                                  double tol = 1e-10) {
  auto load = [&](double t) { return gather_interior(assemble_load(fine, source, t), fine); };
  const Vector xi0 = gather_interior(interpolate_nodal(fine, f), fine);
  const Vector eta0 = gather_interior(interpolate_nodal(fine, g), fine);
  return crank_nicolson_sparse(ops.stiffness, ops.mass, load, xi0, eta0, dt, steps, tol);
}

// Discrete CN energy 1/2 eta^T M eta + 1/2 xi^T S xi; conserved exactly for
// vanishing loads.
template <class Mat>
double cn_energy(const Mat& S, const Mat& M, const Vector& xi, const Vector& eta) {
  return 0.5 * dot(eta, M.multiply(eta)) + 0.5 * dot(xi, S.multiply(xi));
}

}  // namespace lodwave
