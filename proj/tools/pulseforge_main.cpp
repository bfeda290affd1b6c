#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pulseforge/experiment.hpp"
#include "pulseforge/version.hpp"

using namespace pulseforge;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  int workers = 0;
  std::uint64_t seed_offset = 0;
};

void attach_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("config", args.config_path, "experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out_dir, "output directory override");
  cmd->add_option("--workers", args.workers, "parallel worker override")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed-offset", args.seed_offset,
                  "shift every configured seed by this amount");
}

ExperimentConfig load_with_overrides(const CommonArgs& args) {
  ExperimentConfig cfg = load_config(args.config_path);
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (args.workers > 0) cfg.workers = args.workers;
  for (auto& seed : cfg.seeds) seed += args.seed_offset;
  return cfg;
}

int do_run(const CommonArgs& args) {
  const ExperimentConfig cfg = load_with_overrides(args);
  const ExperimentResult result = run_experiment(cfg);
  for (const auto& run : result.runs) {
    std::cout << "seed " << run.seed << ": " << to_string(run.report.status)
              << ", gate error " << format_double(run.report.final_gate_error)
              << ", " << run.report.accepted_iterations()
              << " accepted iterations, "
              << format_double(run.report.total_seconds) << " s\n";
  }
  std::cout << "summary: " << result.summary_path << "\n";
  return result.all_converged ? 0 : 1;
}

int do_sweep(const CommonArgs& args, const std::vector<double>& norms) {
  const ExperimentConfig cfg = load_with_overrides(args);
  const SweepResult result = campaign_norm_sweep(cfg, norms);
  std::cout << result.rows.size() << " cells -> " << result.csv_path << "\n";
  return result.all_converged ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pulse synthesis for bilinear quantum control systems"};
  app.set_version_flag("--version", PULSEFORGE_VERSION);
  app.require_subcommand(1);

  CommonArgs run_args;
  CLI::App* run_cmd = app.add_subcommand("run", "solve every configured seed");
  attach_common(run_cmd, run_args);

  CommonArgs sweep_args;
  std::vector<double> norms;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "norm x seed campaign over a norm list");
  attach_common(sweep_cmd, sweep_args);
  sweep_cmd->add_option("--norms", norms, "initial pulse norms to sweep")
      ->required()
      ->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return do_run(run_args);
    return do_sweep(sweep_args, norms);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
}
