#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lodwave/lodwave.hpp"

namespace {

int run_command(const std::string& config_path, bool dry_run, int threads_override,
                const std::string& out_override) {
  lodwave::json doc;
  {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "lodwave: cannot open config '" << config_path << "'\n";
      return 1;
    }
    try {
      in >> doc;
    } catch (const std::exception& e) {
      std::cerr << "lodwave: config parse error: " << e.what() << "\n";
      return 1;
    }
  }
  // accept a previous run.json as well as a bare config document
  if (doc.contains("config") && doc["config"].is_object()) doc = doc["config"];

  lodwave::ExperimentConfig cfg;
  try {
    cfg = lodwave::parse_config(doc);
  } catch (const std::exception& e) {
    std::cerr << "lodwave: invalid config: " << e.what() << "\n";
    return 1;
  }
  if (threads_override >= 0) cfg.threads = threads_override;
  if (!out_override.empty()) cfg.output_dir = out_override;

  if (dry_run) {
    std::cout << "resolved configuration:\n" << lodwave::to_json(cfg).dump(2) << "\n";
    return 0;
  }
  try {
    const auto result = lodwave::run_experiment(cfg);
    std::cout << "wrote " << result.rows.size() << " error rows to " << cfg.output_dir
              << "/errors.csv";
    if (result.eoc_written) std::cout << " and eoc.csv";
    std::cout << "\n";
  } catch (const std::exception& e) {
    std::cerr << "lodwave: run failed: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LOD multiscale solver for the 2-D wave equation"};
  app.require_subcommand(1);

  std::string config_path;
  bool dry_run = false;
  int threads = -1;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "run an experiment configuration");
  run->add_option("config", config_path, "JSON experiment configuration")->required();
  run->add_flag("--dry-run", dry_run, "validate and print the resolved configuration");
  run->add_option("--threads", threads, "override the configured thread count");
  run->add_option("--out", out_dir, "override the configured output directory");

  CLI11_PARSE(app, argc, argv);
  if (run->parsed()) return run_command(config_path, dry_run, threads, out_dir);
  return 1;
}
