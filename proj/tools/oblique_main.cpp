#include <iostream>

#include "CLI11.hpp"
#include "oblique/config.hpp"
#include "oblique/errors.hpp"
#include "oblique/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Oblique reflection experiments"};
  app.require_subcommand(1);

  std::string config_path, report_dir;
  std::optional<unsigned> workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;

  CLI::App* run = app.add_subcommand("run", "Run the experiment described by a TOML config");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("--workers", workers, "Cap on worker threads (0 = hardware concurrency)");
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--out", out, "Override the output directory");

  CLI::App* report = app.add_subcommand("report", "Print the pass/fail table of an output directory");
  report->add_option("dir", report_dir, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*report) {
      std::cout << oblique::render_report(report_dir);
      return 0;
    }
    const oblique::ExperimentConfig cfg = oblique::load_config(config_path, {seed, workers, out});
    const oblique::RunOutcome outcome = oblique::run_experiment(cfg, cfg.output);
    if (!outcome.error_kind.empty())
      std::cerr << "oblique: " << outcome.error_kind << " error: " << outcome.error_message << '\n';
    std::cout << oblique::render_report(cfg.output);
    return outcome.exit_code();
  } catch (const oblique::Error& e) {
    std::cerr << "oblique: " << e.kind() << " error: " << e.what() << '\n';
    return 2;
  }
}
