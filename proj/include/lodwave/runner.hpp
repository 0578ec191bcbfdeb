#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "lodwave/config.hpp"
#include "lodwave/experiments.hpp"
#include "lodwave/interpolation.hpp"
#include "lodwave/problems.hpp"
#include "lodwave/vtk.hpp"
#include "lodwave/wavesolve.hpp"

namespace lodwave {

struct ExperimentResult {
  std::vector<ErrorRecord> rows;
  std::vector<EOCTable> eoc;  // five columns when written
  bool eoc_written = false;
  json run_info;
};

namespace detail {

inline int cells_per_side(const Domain2D& domain, int exponent) {
  const double n = domain.width() * std::pow(2.0, exponent);
  const long long r = std::llround(n);
  if (std::abs(n - r) > 1e-9 || r < 1)
    throw std::invalid_argument("mesh exponent does not produce an integer cell count");
  return static_cast<int>(r);
}

class StageTimer {
 public:
  explicit StageTimer(json& sink) : sink_(sink) {}
  template <class Fn>
  auto run(const std::string& stage, Fn&& fn) -> decltype(fn()) {
    const auto start = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        record(stage, start);
      } else {
        auto out = fn();
        record(stage, start);
        return out;
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("stage '" + stage + "': " + e.what());
    }
  }

 private:
  void record(const std::string& stage, std::chrono::steady_clock::time_point start) {
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    sink_.push_back({{"stage", stage}, {"ms", ms}});
  }
  json& sink_;
};

}  // namespace detail

// Runs one experiment configuration end to end: reference solve once, then a
// corrector build + multiscale Crank-Nicolson run per (H, k), errors at t = T.
// Writes errors.csv, run.json, eoc.csv when one row per H, and optional VTK
// snapshots.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  namespace fs = std::filesystem;
  ExperimentResult result;
  json timings = json::array();
  detail::StageTimer timer(timings);

  const ModelProblem problem = make_model_problem(cfg.problem_id, cfg.problem_params);
  const int n_fine = detail::cells_per_side(problem.domain, cfg.h_exponent);
  const int J = cfg.steps();
  const int threads = resolve_threads(cfg.threads);

  fs::create_directories(cfg.output_dir);
  if (!cfg.corrector_cache_dir.empty()) fs::create_directories(cfg.corrector_cache_dir);

  const Triangulation fine = timer.run("fine mesh", [&] {
    return build_structured_mesh(problem.domain, n_fine);
  });
  const CoefficientField field = timer.run("coefficient sampling", [&] {
    CoefficientField f = sample_coefficient(problem.coefficient, fine);
    if (f.min() < problem.alpha || f.max() > problem.beta)
      throw std::runtime_error("sampled coefficient leaves the declared spectral bounds");
    return f;
  });
  const std::uint64_t coef_hash = coefficient_hash(field);
  const FineOperators ops = timer.run("fine assembly", [&] {
    return build_fine_operators(fine, field);
  });
  const Trajectory reference = timer.run("reference solve", [&] {
    return reference_solve(ops, fine, problem.source, problem.initial_u, problem.initial_v,
                           cfg.dt, J, cfg.timestep_cg_tol);
  });

  auto maybe_vtk = [&](const std::string& name, const Vector& full) {
    if (!cfg.emit_vtk) return;
    write_vtk((fs::path(cfg.output_dir) / (name + ".vtk")).string(), fine, "u", &full);
  };
  for (int n : {0, J / 2, J})
    maybe_vtk("u_ref_n" + std::to_string(n), scatter_interior(reference.xi[n], fine));

  const Vector f_fine = interpolate_nodal(fine, problem.initial_u);
  const Vector g_fine = interpolate_nodal(fine, problem.initial_v);
  const bool static_source = !problem.source_time_dependent;
  const Vector static_load =
      static_source ? assemble_load(fine, problem.source, 0.0) : Vector{};

  for (int H_exp : cfg.H_exponents) {
    const int n_coarse = detail::cells_per_side(problem.domain, H_exp);
    const int levels = cfg.h_exponent - H_exp;
    const std::string h_tag = "H=2^-" + std::to_string(H_exp);
    const MeshHierarchy hier = timer.run("hierarchy " + h_tag, [&] {
      return refine_hierarchy(build_structured_mesh(problem.domain, n_coarse), levels);
    });
    const ClementOperator clement =
        timer.run("clement " + h_tag, [&] { return build_clement(hier); });

    for (int k : cfg.k_for(H_exp)) {
      const std::string tag = h_tag + " k=" + std::to_string(k);
      CorrectorBasis basis;
      const std::string cache_file =
          cfg.corrector_cache_dir.empty()
              ? std::string{}
              : (fs::path(cfg.corrector_cache_dir) /
                 (cfg.problem_id + "_H" + std::to_string(H_exp) + "_h" +
                  std::to_string(cfg.h_exponent) + "_k" + std::to_string(k) + "_" +
                  std::to_string(coef_hash) + ".lodb"))
                    .string();
      bool from_cache = false;
      if (!cache_file.empty()) {
        auto loaded =
            load_corrector_basis(cache_file, clement, k, fine.n_vertices(), coef_hash);
        if (loaded) {
          basis = std::move(*loaded);
          from_cache = true;
        }
      }
      if (!from_cache) {
        basis = timer.run("correctors " + tag, [&] {
          return build_corrector_basis(hier, ops.stiffness_full, field, clement, k, threads,
                                       cfg.corrector);
        });
        if (!cache_file.empty()) save_corrector_basis(cache_file, basis, coef_hash);
      }
      const MultiscaleSystem ms = timer.run("multiscale system " + tag, [&] {
        return assemble_multiscale(basis, ops.stiffness_full, ops.mass_full, fine);
      });

      std::map<long long, Vector> load_cache;
      auto ms_load = [&](double t) {
        if (static_source) return assemble_ms_load(basis, static_load);
        const long long key = std::llround(t / cfg.dt);
        auto it = load_cache.find(key);
        if (it == load_cache.end())
          it = load_cache
                   .emplace(key, assemble_ms_load(basis, assemble_load(fine, problem.source, t)))
                   .first;
        return it->second;
      };

      InitialData init;
      init.f_bar = cfg.f_projection == ProjectionKind::Elliptic
                       ? project_initial_elliptic(ms, basis, ops.stiffness_full, f_fine)
                       : project_initial_l2(ms, basis, ops.mass_full, f_fine);
      init.g_bar = cfg.g_projection == ProjectionKind::L2
                       ? project_initial_l2(ms, basis, ops.mass_full, g_fine)
                       : project_initial_elliptic(ms, basis, ops.stiffness_full, g_fine);

      const Trajectory traj = timer.run("multiscale CN " + tag, [&] {
        return crank_nicolson_dense(ms.stiffness, ms.mass, ms_load, init, cfg.dt, J);
      });

      ErrorRecord rec = timer.run("errors " + tag, [&] {
        return compute_errors(traj, basis, reference, fine, ops.unit_stiffness_full,
                              ops.mass_full, J);
      });
      rec.H_exp = H_exp;
      rec.h_exp = cfg.h_exponent;
      result.rows.push_back(rec);

      for (int n : {0, J / 2, J})
        maybe_vtk("u_ms_H" + std::to_string(H_exp) + "_k" + std::to_string(k) + "_n" +
                      std::to_string(n),
                  expand_on_fine(basis.psi, traj.xi[n], fine.n_vertices()));
    }
  }

  write_errors_csv((fs::path(cfg.output_dir) / "errors.csv").string(), result.rows);

  const bool one_row_per_H =
      result.rows.size() == cfg.H_exponents.size() && result.rows.size() >= 2;
  if (one_row_per_H) {
    auto column = [&](auto member) {
      std::vector<std::pair<double, double>> pairs;
      for (const auto& r : result.rows)
        pairs.emplace_back(std::pow(2.0, -r.H_exp), r.*member);
      return compute_eoc(pairs);
    };
    result.eoc.push_back(column(&ErrorRecord::e0_L2_rel));
    result.eoc.push_back(column(&ErrorRecord::ems_L2_rel));
    result.eoc.push_back(column(&ErrorRecord::ems_H1_rel));
    result.eoc.push_back(column(&ErrorRecord::dtems_L2_rel));
    result.eoc.push_back(column(&ErrorRecord::dtems_H1_rel));
    write_eoc_csv((fs::path(cfg.output_dir) / "eoc.csv").string(), result.rows, result.eoc);
    result.eoc_written = true;
  }

  result.run_info["config"] = to_json(cfg);
  result.run_info["coefficient_range"] = {{"min", field.min()}, {"max", field.max()}};
  result.run_info["fine_vertices"] = fine.n_vertices();
  result.run_info["steps"] = J;
  result.run_info["threads"] = threads;
  result.run_info["timings"] = timings;
  result.run_info["eoc_written"] = result.eoc_written;
  std::ofstream run_out((fs::path(cfg.output_dir) / "run.json").string());
  run_out << result.run_info.dump(2) << "\n";
  return result;
}

}  // namespace lodwave
