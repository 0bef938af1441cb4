#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "wsl/data.hpp"
#include "wsl/loss.hpp"
#include "wsl/train.hpp"

namespace wsl::cli {

/// Simulated clean pool + crawl. Each run seed draws its own pool, split and
/// web corpus.
struct SyntheticDataConfig {
  int num_classes = 5;
  int feature_dim = 8;
  /// Explicit class means; when empty, axis_class_means(K, D, mean_separation).
  std::vector<std::vector<double>> means;
  double mean_separation = 2.0;
  double sigma = 1.0;
  /// Pool sizes before the grouped split.
  std::vector<int> pool_counts{120, 80, 80, 40, 20};
  int groups_per_class = 10;
  double train_fraction = 0.5;

  /// Explicit kernel; when empty, uniform_off_diagonal_kernel(K, kernel_diagonal).
  std::vector<std::vector<double>> kernel;
  double kernel_diagonal = 0.7;
  double cross_domain_rate = 0.2;
  int bag_size = 20;
  BackgroundSpec background{0.0, 3.0};

  ClassMixtureSpec mixture(std::uint64_t seed) const;
  NoiseSpec noise(std::uint64_t seed) const;
};

struct FileDataConfig {
  std::string clean_train;
  std::string clean_test;
  std::string web;
};

TrainConfig default_web_train_config();
TrainConfig default_clean_train_config();

struct RunConfig {
  std::vector<int> hidden_sizes{32, 32};
  std::string init_scale{kInitSqrt2OverFanIn};
  TrainConfig train_web = default_web_train_config();
  TrainConfig train_clean = default_clean_train_config();
  ModulationOptions loss;

  /// "synthetic" or "files".
  std::string data_source = "synthetic";
  SyntheticDataConfig synthetic;
  FileDataConfig files;

  std::vector<std::uint64_t> seeds{0};
  std::vector<Arm> arms{Arm::BL1, Arm::BL2, Arm::Proposed};
  std::string output_dir = "runs";

  void validate() const;
};

/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig run_config_from_json(std::string_view text);
RunConfig load_run_config(const std::string& path);
/// Every field materialized; feeding the output back reproduces the config.
std::string run_config_to_json(const RunConfig& cfg);

/// Comma-separated unsigned integers, e.g. "1,2,3".
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

}  // namespace wsl::cli
