#include <iostream>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "cli/run_config.hpp"

int main(int argc, char** argv) {
  using namespace wsl::cli;

  CLI::App app{"wsl: train on noisy web data, fine-tune on clean data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", code_version());

  GlobalOptions opts;
  std::string config_path, out, seeds;
  app.add_option("--config", config_path, "run config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--out", out, "output directory");
  app.add_option("--seed", seeds, "seed or comma-separated seed list");
  app.add_option("--jobs", opts.jobs, "worker threads for run")->check(CLI::PositiveNumber);
  app.add_flag("--overwrite", opts.overwrite, "replace an existing run or dataset");
  app.add_flag("--stamp-time", opts.stamp_time, "write wall-clock UTC into eval.json");

  auto* synth = app.add_subcommand("synth", "generate a synthetic clean split and web corpus");
  auto* run = app.add_subcommand("run", "train and evaluate arms x seeds");
  auto* report = app.add_subcommand("report", "rebuild summaries of a run directory");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a labeled dataset");
  eval->add_option("--checkpoint", eval_args.checkpoint)->required();
  eval->add_option("--data", eval_args.data)->required();
  eval->add_flag("--export-features", eval_args.export_features, "also write penultimate features");

  EstimateNoiseArgs noise_args;
  auto* noise = app.add_subcommand("estimate-noise", "estimate the label transition matrix");
  noise->add_option("--checkpoint", noise_args.checkpoint, "oracle checkpoint")->required();
  noise->add_option("--web", noise_args.web, "web corpus JSON")->required();

  for (auto* sub : {synth, run, report, eval, noise}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (!config_path.empty()) opts.config_path = config_path;
    if (!out.empty()) opts.out = out;
    if (!seeds.empty()) opts.seeds = parse_seed_list(seeds);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  if (*synth) return cmd_synth(opts, std::cout, std::cerr);
  if (*run) return cmd_run(opts, std::cout, std::cerr);
  if (*report) return cmd_report(opts, std::cout, std::cerr);
  if (*eval) return cmd_eval(opts, eval_args, std::cout, std::cerr);
  return cmd_estimate_noise(opts, noise_args, std::cout, std::cerr);
}
