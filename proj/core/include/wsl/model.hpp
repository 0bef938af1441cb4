#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "wsl/data.hpp"

namespace wsl {

/// Weight init rule: zero-mean normal with std sqrt(2 / fan_in).
inline constexpr std::string_view kInitSqrt2OverFanIn = "sqrt2_over_fan_in";

struct ModelConfig {
  int input_dim = 0;
  std::vector<int> hidden_sizes;
  int num_classes = 0;
  double dropout_keep_prob = 1.0;
  std::uint64_t init_seed = 0;
  std::string init_scale{kInitSqrt2OverFanIn};

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

/// Affine layer: out = in * weights + bias, weights is fan_in x fan_out.
struct Layer {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
};

/// Feedforward ReLU network with a softmax head.
struct ModelParams {
  ModelConfig config;
  std::vector<Layer> layers;

  /// Shapes chain from input_dim through hidden_sizes to num_classes and
  /// every entry is finite.
  void validate() const;
};

/// Parameter-shaped container used for gradients and momentum buffers.
struct ParamGrads {
  std::vector<Layer> layers;

  static ParamGrads zeros_like(const ModelParams& params);
};

struct EvalMode {};
struct TrainMode {
  std::uint64_t dropout_seed = 0;
};
using ForwardMode = std::variant<EvalMode, TrainMode>;

/// Activations kept by forward() for backward().
struct ForwardCache {
  /// inputs[l] is what layer l consumed (post-dropout for hidden outputs).
  std::vector<Eigen::MatrixXd> inputs;
  /// ReLU pre-activations of each hidden layer.
  std::vector<Eigen::MatrixXd> hidden_pre;
  /// Scaled inverted-dropout masks (entries 0 or 1/keep); empty when no
  /// dropout was applied.
  std::vector<Eigen::MatrixXd> dropout_masks;
  std::vector<Eigen::Index> layer_widths;
};

struct ForwardResult {
  Eigen::MatrixXd logits;
  Eigen::MatrixXd posteriors;
  ForwardCache cache;
};

ModelParams init_params(const ModelConfig& cfg);

/// Row-wise softmax using the max-subtracted form.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);

ForwardResult forward(const ModelParams& params, const Eigen::MatrixXd& batch,
                      const ForwardMode& mode);

/// Gradients of the loss w.r.t. every parameter given dL/dlogits (batch x K).
/// Follows the dropout masks recorded in `cache`.
ParamGrads backward(const ModelParams& params, const ForwardCache& cache,
                    const Eigen::MatrixXd& grad_logits);

/// Eval-mode posteriors (N x K), order-preserving.
Eigen::MatrixXd predict(const ModelParams& params, const Dataset& ds);

/// Last hidden layer activations (N x last hidden width), eval mode.
Eigen::MatrixXd penultimate_features(const ModelParams& params, const Dataset& ds);

// ---- checkpoints ------------------------------------------------------------

inline constexpr std::string_view kCheckpointMagic = "WSLCKPT1";

/// Optional shape expectations checked on load.
struct CheckpointExpect {
  std::optional<int> num_classes;
  std::optional<int> input_dim;
};

/// Layout: magic, u64 little-endian header length, JSON header, then packed
/// little-endian float64 arrays (per layer: row-major weights, then bias).
std::string serialize_checkpoint(const ModelParams& params);
ModelParams deserialize_checkpoint(std::string_view bytes, const CheckpointExpect& expect = {});
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path, const CheckpointExpect& expect = {});

}  // namespace wsl
