// Acceptance suite: one test case and one printed PASS/FAIL line per
// criterion, run against the same configurations as the experiment tables.

#include <catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "lodwave/lodwave.hpp"
#include "oracles.hpp"

using namespace lodwave;
namespace fs = std::filesystem;

namespace {

constexpr int kThreads = 2;

void report(int criterion, bool pass, const std::string& what) {
  std::printf("[acceptance] criterion %02d %s  %s\n", criterion, pass ? "PASS" : "FAIL",
              what.c_str());
  std::fflush(stdout);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// Shared MP2 setup at (H, h) = (2^-3, 2^-6) used by criteria 1-4.
struct Mp2Setup {
  MeshHierarchy hier;
  CoefficientField field;
  FineOperators ops;
  ClementOperator clement;
  CorrectorBasis basis_k2;
  MultiscaleSystem ms_k2;
};

const Mp2Setup& mp2_setup() {
  static const Mp2Setup s = [] {
    Mp2Setup out;
    out.hier = refine_hierarchy(build_structured_mesh({0, 1, 0, 1}, 8), 3);
    const auto problem = make_model_problem("mp2");
    out.field = sample_coefficient(problem.coefficient, out.hier.fine);
    out.ops = build_fine_operators(out.hier.fine, out.field);
    out.clement = build_clement(out.hier);
    out.basis_k2 = build_corrector_basis(out.hier, out.ops.stiffness_full, out.field,
                                         out.clement, 2, kThreads);
    out.ms_k2 = assemble_multiscale(out.basis_k2, out.ops.stiffness_full, out.ops.mass_full,
                                    out.hier.fine);
    return out;
  }();
  return s;
}

ExperimentConfig table_config(const std::string& problem, std::vector<int> H_exps, int h_exp,
                              double k_log_c, const std::string& out_dir, int threads) {
  json j;
  j["problem"] = problem;
  j["H_exponents"] = H_exps;
  j["h_exponent"] = h_exp;
  j["k_values"] = "log-coupled";
  j["k_log_c"] = k_log_c;
  j["threads"] = threads;
  j["output_dir"] = out_dir;
  return parse_config(j);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double l2_of(const SparseMatrix& mass, const SparseVector& v, int n) {
  const Vector d = v.to_dense(n);
  return std::sqrt(std::max(0.0, dot(d, mass.multiply(d))));
}

}  // namespace

TEST_CASE("criterion 1: corrector kernel invariant") {
  const auto& s = mp2_setup();
  double worst = 0.0;
  for (std::size_t z = 0; z < s.basis_k2.q.size(); ++z) {
    const double qn = s.basis_k2.q[z].max_abs();
    REQUIRE(qn > 0.0);
    const double in = norm_inf(apply_IH(s.clement, s.basis_k2.q[z]));
    worst = std::max(worst, in / qn);
  }
  const bool pass = worst <= 1e-9;
  report(1, pass, "corrector kernel invariant, max |I_H q|/|q| = " + fmt(worst));
  CHECK(pass);
}

TEST_CASE("criterion 2: L2 orthogonality of correctors to the coarse space") {
  const auto& s = mp2_setup();
  const int nf = s.hier.fine.n_vertices();
  const int n = static_cast<int>(s.basis_k2.q.size());
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> pick(0, n - 1);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int i = pick(rng);
    const int j = pick(rng);
    const Vector mq = s.ops.mass_full.multiply(s.basis_k2.q[j].to_dense(nf));
    const double ip = std::abs(s.basis_k2.phi[i].dot_dense(mq));
    const double scale =
        l2_of(s.ops.mass_full, s.basis_k2.phi[i], nf) * l2_of(s.ops.mass_full, s.basis_k2.q[j], nf);
    worst = std::max(worst, ip / scale);
  }
  const bool pass = worst <= 1e-10;
  report(2, pass, "L2 orthogonality, max |(Phi_i, q_j)| / scale = " + fmt(worst));
  CHECK(pass);
}

TEST_CASE("criterion 3: corrector decay in the localization parameter") {
  const auto& s = mp2_setup();
  const int z_vertex = s.hier.coarse.vertex_id(4, 4);
  const int row = s.hier.coarse.interior_node_index[z_vertex];
  REQUIRE(row >= 0);
  // k_max = first k at which every patch of the six elements owning z covers
  // the domain; beyond it q_z(k) is constant
  int k_max = 1;
  for (;; ++k_max) {
    bool all_full = true;
    for (int e = 0; e < s.hier.coarse.n_triangles(); ++e) {
      bool owns = false;
      for (int v : s.hier.coarse.triangles[e]) owns |= (v == z_vertex);
      if (!owns) continue;
      all_full &= static_cast<int>(build_patch(s.hier, e, k_max).coarse_elements.size()) ==
                  s.hier.coarse.n_triangles();
    }
    if (all_full) break;
  }
  REQUIRE(k_max >= 6);
  std::vector<SparseVector> q_of_k;
  for (int k = 1; k <= k_max; ++k) {
    const auto basis =
        build_corrector_basis(s.hier, s.ops.stiffness_full, s.field, s.clement, k, kThreads);
    q_of_k.push_back(basis.q[row]);
  }
  std::vector<double> e;
  for (int k = 1; k <= 5; ++k) {
    Vector diff = q_of_k[k - 1].to_dense(s.hier.fine.n_vertices());
    q_of_k[k_max - 1].add_to_dense(diff, -1.0);
    e.push_back(std::sqrt(std::max(0.0, dot(diff, s.ops.stiffness_full.multiply(diff)))));
  }
  bool pass = true;
  std::string detail = "e(k) =";
  for (int k = 1; k <= 4; ++k) {
    pass &= e[k] <= 0.9 * e[k - 1];
    detail += " " + fmt(e[k - 1]);
  }
  detail += " " + fmt(e[4]) + " (k_max=" + std::to_string(k_max) + ")";
  report(3, pass, "corrector decay, " + detail);
  CHECK(pass);
}

TEST_CASE("criterion 4: Crank-Nicolson energy conservation") {
  const auto& s = mp2_setup();
  // MP2 system, forcing removed, nonzero initial data (the smooth MP4 pair)
  const auto mp4 = make_model_problem("mp4");
  InitialData init;
  init.f_bar = project_initial_elliptic(s.ms_k2, s.basis_k2, s.ops.stiffness_full,
                                        interpolate_nodal(s.hier.fine, mp4.initial_u));
  init.g_bar = project_initial_l2(s.ms_k2, s.basis_k2, s.ops.mass_full,
                                  interpolate_nodal(s.hier.fine, mp4.initial_v));
  const int n = s.ms_k2.stiffness.size();
  const int steps = 200;
  auto no_load = [n](double) { return Vector(n, 0.0); };
  const auto traj =
      crank_nicolson_dense(s.ms_k2.stiffness, s.ms_k2.mass, no_load, init, 1.0 / steps, steps);
  const double e0 = cn_energy(s.ms_k2.stiffness, s.ms_k2.mass, traj.xi[0], traj.eta[0]);
  REQUIRE(e0 > 0.0);
  double worst = 0.0;
  for (int step = 0; step <= steps; ++step) {
    const double e = cn_energy(s.ms_k2.stiffness, s.ms_k2.mass, traj.xi[step], traj.eta[step]);
    worst = std::max(worst, std::abs(e - e0) / e0);
  }
  const bool pass = worst <= 1e-10;
  report(4, pass, "energy conservation over 200 steps, max |E-E0|/E0 = " + fmt(worst));
  CHECK(pass);
}

TEST_CASE("criterion 5: reference solver analytic convergence") {
  constexpr double pi = std::numbers::pi;
  auto f = [](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); };
  auto zero2 = [](double, double) { return 0.0; };
  auto zero3 = [](double, double, double) { return 0.0; };
  std::vector<double> errors;
  for (int level = 0; level < 4; ++level) {
    const int n = 16 << level;
    const int steps = 10 << level;  // to t = 0.5
    const auto tri = build_structured_mesh({0, 1, 0, 1}, n);
    const auto ops = build_fine_operators(tri, CoefficientField::constant(tri.n_triangles(), 1.0));
    const auto traj = reference_solve(ops, tri, zero3, f, zero2, 0.5 / steps, steps, 1e-12);
    Vector err = scatter_interior(traj.xi[steps], tri);
    const double amp = std::cos(std::sqrt(2.0) * pi * 0.5);
    for (int v = 0; v < tri.n_vertices(); ++v)
      err[v] -= amp * f(tri.vertices[v].x, tri.vertices[v].y);
    errors.push_back(std::sqrt(dot(err, ops.mass_full.multiply(err))));
  }
  double order_sum = 0.0;
  std::string detail = "orders:";
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    const double order = std::log2(errors[i] / errors[i + 1]);
    order_sum += order;
    detail += " " + fmt(order);
  }
  const double observed = order_sum / 3.0;
  const bool pass = observed >= 1.8 && observed <= 2.2;
  report(5, pass, "analytic wave convergence, mean order " + fmt(observed) + " (" + detail + ")");
  CHECK(pass);
}

TEST_CASE("criterion 6: model problem 1 table reproduction") {
  const auto cfg = table_config("mp1", {3}, 7, 1.0, "acceptance_crit6", 1);
  const auto result = run_experiment(cfg);
  REQUIRE(result.rows.size() == 1);
  const auto& r = result.rows[0];
  REQUIRE(r.k == 3);
  const bool pass_ms = std::abs(r.ems_L2_rel - 0.0105) <= 0.35 * 0.0105;
  const bool pass_e0 = std::abs(r.e0_L2_rel - 0.0234) <= 0.35 * 0.0234;
  report(6, pass_ms && pass_e0,
         "table row (H,k)=(2^-3,3): ems_L2 = " + fmt(r.ems_L2_rel) + " (target 0.0105 +-35%), " +
             "e0_L2 = " + fmt(r.e0_L2_rel) + " (target 0.0234 +-35%)");
  CHECK(pass_ms);
  CHECK(pass_e0);
}

TEST_CASE("criterion 7: model problem 1 EOC") {
  const auto cfg = table_config("mp1", {1, 2, 3}, 7, 1.0, "acceptance_crit7", kThreads);
  const auto result = run_experiment(cfg);
  REQUIRE(result.eoc_written);
  const double eoc_e0 = result.eoc[0].average;
  const double eoc_ms = result.eoc[1].average;
  const bool pass = std::abs(eoc_ms - 1.84) <= 0.35 && std::abs(eoc_e0 - 1.31) <= 0.35;
  report(7, pass, "average EOC: ems_L2 = " + fmt(eoc_ms) + " (target 1.84 +-0.35), e0_L2 = " +
                      fmt(eoc_e0) + " (target 1.31 +-0.35)");
  CHECK(pass);
}

TEST_CASE("criterion 8: model problem 2 EOC") {
  const auto cfg = table_config("mp2", {2, 3, 4}, 8, 0.5, "acceptance_crit8", kThreads);
  const auto result = run_experiment(cfg);
  REQUIRE(result.eoc_written);
  const double eoc_ms_l2 = result.eoc[1].average;
  const double eoc_ms_h1 = result.eoc[2].average;
  const bool pass = eoc_ms_l2 >= 1.8 && eoc_ms_h1 >= 0.9;
  report(8, pass, "average EOC: ems_L2 = " + fmt(eoc_ms_l2) + " (>= 1.8), ems_H1 = " +
                      fmt(eoc_ms_h1) + " (>= 0.9)");
  CHECK(pass);
}

TEST_CASE("criterion 9: model problem 3 high-contrast robustness") {
  const auto cfg = table_config("mp3", {2, 3, 4}, 8, 0.5, "acceptance_crit9", kThreads);
  const auto result = run_experiment(cfg);
  REQUIRE(result.rows.size() == 3);
  bool monotone = true, corrected_better = true;
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    if (i + 1 < result.rows.size()) {
      monotone &= result.rows[i + 1].e0_L2_rel < result.rows[i].e0_L2_rel;
      monotone &= result.rows[i + 1].ems_L2_rel < result.rows[i].ems_L2_rel;
      monotone &= result.rows[i + 1].ems_H1_rel < result.rows[i].ems_H1_rel;
    }
    corrected_better &= result.rows[i].ems_L2_rel < result.rows[i].e0_L2_rel;
  }
  const bool pass = monotone && corrected_better;
  std::string detail = "ems_L2:";
  for (const auto& r : result.rows) detail += " " + fmt(r.ems_L2_rel);
  report(9, pass, "channel run monotone=" + std::string(monotone ? "yes" : "no") +
                      ", corrected<coarse=" + std::string(corrected_better ? "yes" : "no") +
                      " (" + detail + ")");
  CHECK(pass);
}

TEST_CASE("criterion 10: model problem 4 not-well-prepared rates") {
  const auto cfg = table_config("mp4", {2, 3, 4, 5}, 8, 0.5, "acceptance_crit10", kThreads);
  const auto result = run_experiment(cfg);
  REQUIRE(result.eoc_written);
  const double eoc_e0 = result.eoc[0].average;
  const double eoc_ms = result.eoc[1].average;
  const double eoc_dt_h1 = result.eoc[4].average;
  const bool pass = eoc_e0 >= 1.0 && eoc_e0 <= 1.8 && eoc_ms >= 1.0 && eoc_ms <= 1.8 &&
                    eoc_dt_h1 < 0.3;
  report(10, pass, "EOC e0 = " + fmt(eoc_e0) + ", ems = " + fmt(eoc_ms) +
                       " (both in [1.0, 1.8]), dt-H1 = " + fmt(eoc_dt_h1) + " (< 0.3)");
  CHECK(pass);
}

TEST_CASE("criterion 11: Schur-complement solve matches the dense KKT oracle") {
  std::mt19937 rng(1234);
  SaddleOptions opt;
  opt.method = SaddleMethod::SchurCg;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<int> nd(8, 40), md(1, 6);
    const int n = nd(rng);
    const int m = std::min(md(rng), n - 1);
    const auto a = oracles::random_spd(n, rng);
    const auto c = oracles::random_constraints(m, n, rng);
    const Vector r = oracles::random_vector(n, rng);
    const Vector q = saddle_solve(a, c, {r}, opt)[0];
    const Vector q_ref = oracles::kkt_solve(a, c, r);
    Vector diff(n);
    for (int i = 0; i < n; ++i) diff[i] = q[i] - q_ref[i];
    worst = std::max(worst, norm2(diff) / norm2(q_ref));
  }
  const bool pass = worst <= 1e-8;
  report(11, pass, "20 random saddle instances, max relative deviation = " + fmt(worst));
  CHECK(pass);
}

TEST_CASE("criterion 12: single-thread determinism of the table run") {
  const auto cfg_a = table_config("mp1", {3}, 7, 1.0, "acceptance_crit12_a", 1);
  const auto cfg_b = table_config("mp1", {3}, 7, 1.0, "acceptance_crit12_b", 1);
  run_experiment(cfg_a);
  run_experiment(cfg_b);
  const std::string a = slurp(fs::path("acceptance_crit12_a") / "errors.csv");
  const std::string b = slurp(fs::path("acceptance_crit12_b") / "errors.csv");
  const bool pass = !a.empty() && a == b;
  report(12, pass, std::string("repeated threads=1 runs are bit-identical: ") +
                       (pass ? "yes" : "no"));
  CHECK(pass);
}
