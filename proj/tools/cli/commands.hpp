#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "run_config.hpp"
#include "wsl/eval.hpp"
#include "wsl/train.hpp"

namespace wsl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Flags shared by every verb.
struct GlobalOptions {
  std::optional<std::string> config_path;
  std::optional<std::string> out;
  std::optional<std::vector<std::uint64_t>> seeds;
  int jobs = 1;
  bool overwrite = false;
  /// Write wall-clock UTC into eval.json; null otherwise so reports stay
  /// byte-reproducible.
  bool stamp_time = false;
};

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  bool export_features = false;
};

struct EstimateNoiseArgs {
  std::string checkpoint;
  std::string web;
};

int cmd_synth(const GlobalOptions& opts, std::ostream& out, std::ostream& err);
int cmd_run(const GlobalOptions& opts, std::ostream& out, std::ostream& err);
int cmd_eval(const GlobalOptions& opts, const EvalArgs& args, std::ostream& out, std::ostream& err);
int cmd_estimate_noise(const GlobalOptions& opts, const EstimateNoiseArgs& args, std::ostream& out,
                       std::ostream& err);
int cmd_report(const GlobalOptions& opts, std::ostream& out, std::ostream& err);

// ---- library surface used by the verbs and by tests -------------------------

/// Clean split and web corpus that every arm of one seed shares.
struct SeedData {
  Dataset clean_train;
  Dataset clean_test;
  WebCorpus web;
};

/// Draws pool -> grouped split -> simulated crawl for one run seed.
SeedData make_synthetic_data(const SyntheticDataConfig& cfg, std::uint64_t seed);

/// Writes clean_train.csv, clean_test.csv and web.json into `dir`.
void write_seed_data(const std::filesystem::path& dir, const SeedData& data);

struct CellOutcome {
  Arm arm = Arm::BL1;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::optional<EvalReport> report;
  std::size_t web_accesses = 0;
};

struct RunOutcome {
  std::vector<CellOutcome> cells;
  bool all_ok() const;
};

/// Executes arms x seeds into cfg.output_dir and writes summary files.
RunOutcome execute_run(const RunConfig& cfg, const GlobalOptions& opts, std::ostream& err);

/// Rebuilds summary.csv and summary_by_arm.csv from an existing run directory.
void write_summaries(const std::filesystem::path& run_dir, const RunConfig& cfg);

/// Per-seed model/shuffle seeds as used by `run`.
ModelConfig cell_model_config(const RunConfig& cfg, int input_dim, int num_classes,
                              std::uint64_t seed);
TrainConfig cell_train_config(const TrainConfig& base, std::uint64_t seed, bool web_stage);

std::string code_version();

}  // namespace wsl::cli
