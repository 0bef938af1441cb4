#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "wsl/data.hpp"
#include "wsl/loss.hpp"
#include "wsl/model.hpp"
#include "wsl/transition.hpp"

namespace wsl {

struct TrainConfig {
  double learning_rate_init = 0.01;
  double momentum = 0.9;
  double lr_decay_factor = 0.5;
  int lr_decay_every = 10;
  int epochs = 30;
  int batch_size = 32;
  std::uint64_t shuffle_seed = 0;
  /// Overrides the model's keep probability for the duration of the stage.
  double dropout_keep_prob = 0.8;
  /// Emit per-batch losses to the stage's verbose stream.
  bool verbose = false;

  void validate() const;
  /// lr_init * decay^floor(epoch / decay_every).
  double learning_rate_at(int epoch) const;
};

/// v' = momentum * v - lr * g;  theta' = theta + v'. Updates in place.
/// Throws DivergenceError on a non-finite gradient.
void sgd_momentum_step(ModelParams& params, const ParamGrads& grads, ParamGrads& velocity,
                       double lr, double momentum);

struct PlainWeighted {};
struct Modulated {
  Eigen::MatrixXd transition;
  ModulationOptions options;
};
using LossMode = std::variant<PlainWeighted, Modulated>;

struct EpochLog {
  int epoch = 0;
  double lr = 0.0;
  double mean_loss = 0.0;
  /// Eval-mode accuracy on the stage's own training labels after the epoch.
  double train_accuracy = 0.0;
  double elapsed_s = 0.0;
};

struct StageResult {
  ModelParams params;
  std::vector<EpochLog> log;
  double wall_seconds = 0.0;
  TrainConfig config;
};

/// Mini-batch SGD with momentum over `ds`. Class weights are taken once from
/// the stage's labels; velocity starts at zero. Deterministic given `cfg`.
StageResult train_stage(const ModelParams& init, const Dataset& ds, const LossMode& loss_mode,
                        const TrainConfig& cfg, std::ostream* verbose_out = nullptr);

/// One JSON object per epoch: {epoch, lr, mean_loss, train_accuracy, elapsed_s}.
std::string stage_log_jsonl(const StageResult& stage);

// ---- experimental arms ------------------------------------------------------

enum class Arm { BL1, BL2, Proposed };

std::string_view to_string(Arm arm);
Arm parse_arm(std::string_view name);

/// Hands out the web corpus and counts every access. Loads lazily when built
/// from a loader. Not thread-safe; one source per running arm.
class WebCorpusSource {
 public:
  explicit WebCorpusSource(WebCorpus corpus);
  explicit WebCorpusSource(std::function<WebCorpus()> loader);

  const WebCorpus& get();
  std::size_t access_count() const noexcept { return accesses_; }

 private:
  std::function<WebCorpus()> loader_;
  std::optional<WebCorpus> corpus_;
  std::size_t accesses_ = 0;
};

struct ArmOptions {
  /// Replace the estimated T by the identity (consistency checks).
  bool force_identity_transition = false;
  ModulationOptions modulation;
  /// Receives per-batch losses when a stage config has verbose set.
  std::ostream* verbose_out = nullptr;
};

struct ArmResult {
  Arm arm = Arm::BL1;
  ModelParams final_params;
  /// Training stages in execution order; one for BL1, web then clean otherwise.
  std::vector<StageResult> stages;
  /// Clean-only oracle trained for the Proposed arm.
  std::optional<StageResult> oracle;
  std::optional<TransitionMatrix> transition;
  std::size_t web_accesses_before_finetune = 0;
  std::size_t web_accesses_total = 0;
};

/// BL1: clean only. BL2: web (plain weighted CE) then clean fine-tune.
/// Proposed: clean oracle -> T on web -> web (modulated CE) then clean
/// fine-tune. Every web stage and the BL1/oracle stage start from
/// init_params(model_cfg).
ArmResult run_arm(Arm arm, const Dataset& clean_train, WebCorpusSource& web,
                  const TrainConfig& cfg_web, const TrainConfig& cfg_clean,
                  const ModelConfig& model_cfg, const ArmOptions& options = {});

}  // namespace wsl
