#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lodwave/assembly.hpp"
#include "lodwave/correctors.hpp"
#include "lodwave/sparse.hpp"
#include "lodwave/wavesolve.hpp"

namespace lodwave {

// Relative errors of one multiscale run against the fine reference at a
// fixed time step, in the table layout of the experiment suite.
struct ErrorRecord {
  int H_exp = 0;
  int h_exp = 0;
  int k = 0;
  double dt = 0.0;
  double t_n = 0.0;
  double e0_L2_rel = 0.0;     // coarse part only, L2
  double ems_L2_rel = 0.0;    // corrected approximation, L2
  double ems_H1_rel = 0.0;    // corrected approximation, full H1
  double dtems_L2_rel = 0.0;  // backward-difference time derivative, L2
  double dtems_H1_rel = 0.0;
};

namespace detail {

inline double norm_with(const SparseMatrix& m, const Vector& v) {
  return std::sqrt(std::max(0.0, dot(v, m.multiply(v))));
}

}  // namespace detail

// L2 norm via the full mass matrix.
inline double l2_norm(const SparseMatrix& mass_full, const Vector& v_full) {
  return detail::norm_with(mass_full, v_full);
}

// Full H1 norm: L2 part plus the unit-coefficient energy seminorm.
inline double h1_norm(const SparseMatrix& unit_stiffness_full, const SparseMatrix& mass_full,
                      const Vector& v_full) {
  const double l2 = dot(v_full, mass_full.multiply(v_full));
  const double semi = dot(v_full, unit_stiffness_full.multiply(v_full));
  return std::sqrt(std::max(0.0, l2 + semi));
}

// Expands coarse multiscale coefficients to a full fine nodal vector using
// the given basis vectors (psi for the corrected field, phi for the coarse
// part alone).
inline Vector expand_on_fine(const std::vector<SparseVector>& basis_vectors, const Vector& coeff,
                             int n_fine_vertices) {
  Vector out(n_fine_vertices, 0.0);
  for (std::size_t i = 0; i < basis_vectors.size(); ++i)
    if (coeff[i] != 0.0) basis_vectors[i].add_to_dense(out, coeff[i]);
  return out;
}

// Errors at step n between a coarse multiscale trajectory and the fine
// reference trajectory (interior vectors). Time-derivative errors use the
// backward difference of the piecewise-linear-in-time reconstruction, so
// they need n >= 1.
inline ErrorRecord compute_errors(const Trajectory& ms_traj, const CorrectorBasis& basis,
                                  const Trajectory& ref_traj, const Triangulation& fine,
                                  const SparseMatrix& unit_stiffness_full,
                                  const SparseMatrix& mass_full, int n) {
  if (n < 1) throw std::invalid_argument("compute_errors: derivative errors need n >= 1");
  if (n > ms_traj.steps() || n > ref_traj.steps())
    throw std::invalid_argument("compute_errors: step out of range");
  if (std::abs(ms_traj.dt - ref_traj.dt) > 1e-14)
    throw std::invalid_argument("compute_errors: trajectories disagree on dt");
  const int nf = fine.n_vertices();
  const double dt = ms_traj.dt;

  auto ms_full = [&](int step) { return expand_on_fine(basis.psi, ms_traj.xi[step], nf); };
  auto coarse_full = [&](int step) { return expand_on_fine(basis.phi, ms_traj.xi[step], nf); };
  auto ref_full = [&](int step) { return scatter_interior(ref_traj.xi[step], fine); };

  const Vector u_ref = ref_full(n);
  const Vector u_ms = ms_full(n);
  const Vector u0 = coarse_full(n);

  auto diff = [](const Vector& a, const Vector& b) {
    Vector d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return d;
  };
  auto scale = [](Vector v, double s) {
    for (double& x : v) x *= s;
    return v;
  };

  const double ref_l2 = l2_norm(mass_full, u_ref);
  const double ref_h1 = h1_norm(unit_stiffness_full, mass_full, u_ref);
  if (!(ref_l2 > 0.0) || !(ref_h1 > 0.0))
    throw std::runtime_error("compute_errors: reference norm vanishes at t_n");

  ErrorRecord rec;
  rec.k = basis.k;
  rec.dt = dt;
  rec.t_n = n * dt;
  rec.e0_L2_rel = l2_norm(mass_full, diff(u0, u_ref)) / ref_l2;
  const Vector e_ms = diff(u_ms, u_ref);
  rec.ems_L2_rel = l2_norm(mass_full, e_ms) / ref_l2;
  rec.ems_H1_rel = h1_norm(unit_stiffness_full, mass_full, e_ms) / ref_h1;

  const Vector du_ms = scale(diff(u_ms, ms_full(n - 1)), 1.0 / dt);
  const Vector du_ref = scale(diff(u_ref, ref_full(n - 1)), 1.0 / dt);
  const double dref_l2 = l2_norm(mass_full, du_ref);
  const double dref_h1 = h1_norm(unit_stiffness_full, mass_full, du_ref);
  if (!(dref_l2 > 0.0) || !(dref_h1 > 0.0))
    throw std::runtime_error("compute_errors: reference derivative norm vanishes at t_n");
  const Vector de = diff(du_ms, du_ref);
  rec.dtems_L2_rel = l2_norm(mass_full, de) / dref_l2;
  rec.dtems_H1_rel = h1_norm(unit_stiffness_full, mass_full, de) / dref_h1;
  return rec;
}

// Experimental orders of convergence under coarse-mesh halving,
// EOC_H = log2(||e_H|| / ||e_{H/2}||), plus their plain average.
struct EOCTable {
  std::vector<double> H;
  std::vector<double> errors;
  std::vector<double> per_step;
  double average = 0.0;
};

inline EOCTable compute_eoc(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 2) throw std::invalid_argument("compute_eoc: need at least two levels");
  EOCTable table;
  for (const auto& [H, err] : pairs) {
    if (!(err > 0.0)) throw std::invalid_argument("compute_eoc: errors must be positive");
    table.H.push_back(H);
    table.errors.push_back(err);
  }
  for (std::size_t i = 0; i + 1 < pairs.size(); ++i) {
    if (std::abs(table.H[i] / table.H[i + 1] - 2.0) > 1e-12)
      throw std::invalid_argument("compute_eoc: H sequence must halve");
    table.per_step.push_back(std::log2(table.errors[i] / table.errors[i + 1]));
  }
  double s = 0.0;
  for (double v : table.per_step) s += v;
  table.average = s / static_cast<double>(table.per_step.size());
  return table;
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

inline void write_errors_csv(const std::string& path, const std::vector<ErrorRecord>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_errors_csv: cannot open " + path);
  out << "H_exp,k,e0_L2_rel,ems_L2_rel,ems_H1_rel,dtems_L2_rel,dtems_H1_rel\n";
  for (const auto& r : rows)
    out << r.H_exp << "," << r.k << "," << format_double(r.e0_L2_rel) << ","
        << format_double(r.ems_L2_rel) << "," << format_double(r.ems_H1_rel) << ","
        << format_double(r.dtems_L2_rel) << "," << format_double(r.dtems_H1_rel) << "\n";
}

// One EOC table per error column, in the layout of the experiment tables:
// the per-H rows followed by a row of averaged EOCs.
inline void write_eoc_csv(const std::string& path, const std::vector<ErrorRecord>& rows,
                          const std::vector<EOCTable>& tables) {
  if (tables.size() != 5) throw std::invalid_argument("write_eoc_csv: five columns expected");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_eoc_csv: cannot open " + path);
  out << "H_exp,k,e0_L2_rel,ems_L2_rel,ems_H1_rel,dtems_L2_rel,dtems_H1_rel\n";
  for (const auto& r : rows)
    out << r.H_exp << "," << r.k << "," << format_double(r.e0_L2_rel) << ","
        << format_double(r.ems_L2_rel) << "," << format_double(r.ems_H1_rel) << ","
        << format_double(r.dtems_L2_rel) << "," << format_double(r.dtems_H1_rel) << "\n";
  out << "EOC,";
  for (const auto& t : tables) out << "," << format_double(t.average);
  out << "\n";
}

}  // namespace lodwave
