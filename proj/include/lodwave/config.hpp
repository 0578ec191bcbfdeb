#pragma once

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lodwave/problems.hpp"
#include "lodwave/saddle.hpp"

namespace lodwave {

using nlohmann::json;

enum class ProjectionKind { Elliptic, L2 };

inline std::string to_string(ProjectionKind p) {
  return p == ProjectionKind::Elliptic ? "elliptic" : "l2";
}

inline ProjectionKind projection_from_string(const std::string& s) {
  if (s == "elliptic") return ProjectionKind::Elliptic;
  if (s == "l2") return ProjectionKind::L2;
  throw std::invalid_argument("config: projection must be 'elliptic' or 'l2', got '" + s + "'");
}

inline std::string to_string(SaddleMethod m) {
  return m == SaddleMethod::BandDirect ? "band_direct" : "schur_cg";
}

inline SaddleMethod saddle_method_from_string(const std::string& s) {
  if (s == "band_direct") return SaddleMethod::BandDirect;
  if (s == "schur_cg") return SaddleMethod::SchurCg;
  throw std::invalid_argument("config: corrector_solver must be 'band_direct' or 'schur_cg'");
}

// Experiment description: which model problem, which (H, k) matrix, the time
// grid, data projections and solver knobs. Mesh sizes are powers of two,
// H = 2^-H_exp and h = 2^-h_exp.
struct ExperimentConfig {
  std::string problem_id;
  std::vector<int> H_exponents;
  int h_exponent = 0;
  bool k_log_coupled = false;
  double k_log_c = 0.5;       // k(H) = floor(|ln H| + c), c in {0.5, 1}
  std::vector<int> k_values;  // used when not log coupled; one row per (H, k)
  double dt = 0.05;
  double T = 1.0;
  ProjectionKind f_projection = ProjectionKind::Elliptic;
  ProjectionKind g_projection = ProjectionKind::L2;
  double timestep_cg_tol = 1e-10;
  SaddleOptions corrector;
  int threads = 0;  // 0 = hardware
  std::string output_dir = ".";
  bool emit_vtk = false;
  std::string corrector_cache_dir;
  ProblemParams problem_params;

  int steps() const { return static_cast<int>(std::llround(T / dt)); }

  std::vector<int> k_for(int H_exp) const {
    if (k_log_coupled) {
      const double H = std::pow(2.0, -H_exp);
      return {static_cast<int>(std::floor(std::abs(std::log(H)) + k_log_c))};
    }
    return k_values;
  }

  void validate() const {
    if (problem_id.empty()) throw std::invalid_argument("config: 'problem' is required");
    if (H_exponents.empty()) throw std::invalid_argument("config: 'H_exponents' is required");
    for (int e : H_exponents)
      if (e < 0) throw std::invalid_argument("config: H exponents must be >= 0");
    for (int e : H_exponents)
      if (h_exponent <= e)
        throw std::invalid_argument("config: h_exponent must exceed every H exponent");
    if (!(dt > 0.0) || !(T > 0.0)) throw std::invalid_argument("config: dt and T must be positive");
    const double j = T / dt;
    if (std::abs(j - std::llround(j)) > 1e-12 * j)
      throw std::invalid_argument("config: dt must divide T");
    if (k_log_coupled) {
      if (k_log_c != 0.5 && k_log_c != 1.0)
        throw std::invalid_argument("config: k_log_c must be 0.5 or 1");
    } else {
      if (k_values.empty())
        throw std::invalid_argument("config: 'k_values' list or \"log-coupled\" required");
      for (int k : k_values)
        if (k < 0) throw std::invalid_argument("config: k values must be >= 0");
    }
    if (threads < 0) throw std::invalid_argument("config: threads must be >= 0");
    if (!(timestep_cg_tol > 0.0) || !(corrector.outer_tol > 0.0) || !(corrector.inner_tol > 0.0))
      throw std::invalid_argument("config: tolerances must be positive");
  }
};

inline json to_json(const ExperimentConfig& c) {
  json j;
  j["problem"] = c.problem_id;
  j["H_exponents"] = c.H_exponents;
  j["h_exponent"] = c.h_exponent;
  if (c.k_log_coupled) {
    j["k_values"] = "log-coupled";
    j["k_log_c"] = c.k_log_c;
  } else {
    j["k_values"] = c.k_values;
  }
  j["dt"] = c.dt;
  j["T"] = c.T;
  j["f_projection"] = to_string(c.f_projection);
  j["g_projection"] = to_string(c.g_projection);
  j["tolerances"] = {{"timestep_cg", c.timestep_cg_tol},
                     {"corrector_outer", c.corrector.outer_tol},
                     {"corrector_inner", c.corrector.inner_tol}};
  j["corrector_solver"] = to_string(c.corrector.method);
  j["threads"] = c.threads;
  j["output_dir"] = c.output_dir;
  j["emit_vtk"] = c.emit_vtk;
  j["corrector_cache_dir"] = c.corrector_cache_dir;
  j["problem_params"] = {
      {"sigma", c.problem_params.sigma},
      {"eps", c.problem_params.eps},
      {"channel",
       {{"center_x", c.problem_params.channel.center_x},
        {"center_y", c.problem_params.channel.center_y},
        {"radius", c.problem_params.channel.radius},
        {"thickness", c.problem_params.channel.thickness},
        {"value", c.problem_params.channel.value},
        {"angle_start_deg", c.problem_params.channel.angle_start_deg},
        {"angle_end_deg", c.problem_params.channel.angle_end_deg}}}};
  return j;
}

inline ExperimentConfig parse_config(const json& j) {
  static const std::set<std::string> known = {
      "problem",      "H_exponents",    "h_exponent", "k_values",
      "k_log_c",      "dt",             "T",          "f_projection",
      "g_projection", "tolerances",     "threads",    "output_dir",
      "emit_vtk",     "problem_params", "corrector_solver", "corrector_cache_dir"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw std::invalid_argument("config: unknown key '" + key + "'");

  ExperimentConfig c;
  c.problem_id = j.at("problem").get<std::string>();
  c.H_exponents = j.at("H_exponents").get<std::vector<int>>();
  c.h_exponent = j.at("h_exponent").get<int>();
  const json& kv = j.at("k_values");
  if (kv.is_string()) {
    if (kv.get<std::string>() != "log-coupled")
      throw std::invalid_argument("config: k_values string must be \"log-coupled\"");
    c.k_log_coupled = true;
    c.k_log_c = j.value("k_log_c", 0.5);
  } else {
    c.k_values = kv.get<std::vector<int>>();
    if (j.contains("k_log_c"))
      throw std::invalid_argument("config: k_log_c only applies to log-coupled k");
  }
  c.dt = j.value("dt", 0.05);
  c.T = j.value("T", 1.0);
  c.f_projection = projection_from_string(j.value("f_projection", std::string("elliptic")));
  c.g_projection = projection_from_string(j.value("g_projection", std::string("l2")));
  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    c.timestep_cg_tol = t.value("timestep_cg", c.timestep_cg_tol);
    c.corrector.outer_tol = t.value("corrector_outer", c.corrector.outer_tol);
    c.corrector.inner_tol = t.value("corrector_inner", c.corrector.inner_tol);
  }
  c.corrector.method =
      saddle_method_from_string(j.value("corrector_solver", std::string("band_direct")));
  c.threads = j.value("threads", 0);
  c.output_dir = j.value("output_dir", std::string("."));
  c.emit_vtk = j.value("emit_vtk", false);
  c.corrector_cache_dir = j.value("corrector_cache_dir", std::string(""));
  if (j.contains("problem_params")) {
    const json& p = j.at("problem_params");
    c.problem_params.sigma = p.value("sigma", c.problem_params.sigma);
    c.problem_params.eps = p.value("eps", c.problem_params.eps);
    if (p.contains("channel")) {
      const json& ch = p.at("channel");
      auto& out = c.problem_params.channel;
      out.center_x = ch.value("center_x", out.center_x);
      out.center_y = ch.value("center_y", out.center_y);
      out.radius = ch.value("radius", out.radius);
      out.thickness = ch.value("thickness", out.thickness);
      out.value = ch.value("value", out.value);
      out.angle_start_deg = ch.value("angle_start_deg", out.angle_start_deg);
      out.angle_end_deg = ch.value("angle_end_deg", out.angle_end_deg);
    }
  }
  c.validate();
  return c;
}

}  // namespace lodwave
