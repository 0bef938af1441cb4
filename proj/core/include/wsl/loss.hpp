#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "wsl/transition.hpp"

namespace wsl {

/// Floor applied inside every log.
inline constexpr double kLogClamp = 1e-12;

struct ClassWeights {
  Eigen::VectorXd w;
  std::vector<std::size_t> source_counts;
};

/// w_c = median(freq) / freq_c. Throws ValidationError on any zero count.
ClassWeights median_frequency_weights(std::span<const std::size_t> label_counts);

/// Scalar loss is the batch mean; grad_logits is d(loss)/d(logits) of that mean.
struct LossReport {
  double loss = 0.0;
  Eigen::VectorXd per_example;
  Eigen::MatrixXd grad_logits;
};

struct ModulationOptions {
  /// Divide s_c by sum_k s_k before the log. Off by default.
  bool renormalize_modulated = false;
};

/// Per example with noisy label c: s_c = sum_j T(c, j) p(j | x) and
/// loss = -w_c log(max(s_c, kLogClamp)).
LossReport modulated_cross_entropy(const Eigen::MatrixXd& posteriors, std::span<const int> labels,
                                   const Eigen::MatrixXd& transition, const ClassWeights& weights,
                                   const ModulationOptions& options = {});
LossReport modulated_cross_entropy(const Eigen::MatrixXd& posteriors, std::span<const int> labels,
                                   const TransitionMatrix& transition, const ClassWeights& weights,
                                   const ModulationOptions& options = {});

/// -w_c log(max(p_c, kLogClamp)); bit-identical to the modulated form with T = I.
LossReport plain_weighted_cross_entropy(const Eigen::MatrixXd& posteriors,
                                        std::span<const int> labels, const ClassWeights& weights);

}  // namespace wsl
