#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "fbmiso/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Forward-integral isometry experiments for fractional Brownian motion"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  int workers = 0;
  std::string out_dir;
  bool quiet = false;

  for (const std::string name : {"isometry", "kernel-convergence", "lemma-suite", "det-component", "bound-scaling"}) {
    auto* sub = app.add_subcommand(name, "run the " + name + " study");
    sub->add_option("--config", config_path, "INI configuration file");
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--workers", workers, "cap on worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_flag("--quiet", quiet, "only log warnings");
  }
  CLI11_PARSE(app, argc, argv);

  spdlog::set_default_logger(spdlog::stderr_color_mt("fbmiso"));
  if (quiet) spdlog::set_level(spdlog::level::warn);
  try {
    const std::string name = app.get_subcommands().front()->get_name();
    fbmiso::ExperimentConfig cfg = config_path.empty() ? fbmiso::ExperimentConfig{} : fbmiso::load_config(config_path);
    const auto study = fbmiso::parse_study(name);
    if (!config_path.empty() && cfg.study != study) {
      spdlog::warn("config names study {}, running {}", fbmiso::study_name(cfg.study), name);
    }
    cfg.study = study;
    if (seed) {
      cfg.seed = *seed;
      cfg.seed_set = true;
    }
    cfg.workers = workers;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    const auto report = fbmiso::run_study(cfg);
    fbmiso::write_outputs(report, cfg);
    fbmiso::write_summary(std::cout, report, cfg);
    return report.all_passed() ? 0 : 1;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
}
