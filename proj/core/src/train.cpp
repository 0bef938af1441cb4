#include "wsl/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "wsl/error.hpp"
#include "wsl/eval.hpp"
#include "wsl/noise.hpp"
#include "wsl/rng.hpp"

namespace wsl {

void TrainConfig::validate() const {
  if (!(learning_rate_init > 0.0)) throw ValidationError("learning_rate_init must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ValidationError("momentum must lie in [0, 1)");
  if (!(lr_decay_factor > 0.0 && lr_decay_factor < 1.0))
    throw ValidationError("lr_decay_factor must lie in (0, 1)");
  if (lr_decay_every < 1) throw ValidationError("lr_decay_every must be >= 1");
  if (epochs < 0) throw ValidationError("epochs must be >= 0");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (!(dropout_keep_prob > 0.0 && dropout_keep_prob <= 1.0))
    throw ValidationError("dropout_keep_prob must lie in (0, 1]");
}

double TrainConfig::learning_rate_at(int epoch) const {
  return learning_rate_init * std::pow(lr_decay_factor, epoch / lr_decay_every);
}

void sgd_momentum_step(ModelParams& params, const ParamGrads& grads, ParamGrads& velocity,
                       double lr, double momentum) {
  if (grads.layers.size() != params.layers.size() || velocity.layers.size() != params.layers.size())
    throw ValidationError("gradient/velocity depth does not match the model");
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& p = params.layers[l];
    const auto& g = grads.layers[l];
    auto& v = velocity.layers[l];
    if (g.weights.rows() != p.weights.rows() || g.weights.cols() != p.weights.cols() ||
        g.bias.size() != p.bias.size() || v.weights.rows() != p.weights.rows() ||
        v.weights.cols() != p.weights.cols() || v.bias.size() != p.bias.size())
      throw ValidationError("gradient/velocity shape mismatch at layer " + std::to_string(l));
    if (!g.weights.allFinite() || !g.bias.allFinite())
      throw DivergenceError("divergence detected: non-finite gradient at layer " +
                            std::to_string(l));
  }
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& p = params.layers[l];
    const auto& g = grads.layers[l];
    auto& v = velocity.layers[l];
    v.weights = momentum * v.weights - lr * g.weights;
    v.bias = momentum * v.bias - lr * g.bias;
    p.weights += v.weights;
    p.bias += v.bias;
  }
}

StageResult train_stage(const ModelParams& init, const Dataset& ds, const LossMode& loss_mode,
                        const TrainConfig& cfg, std::ostream* verbose_out) {
  cfg.validate();
  init.validate();
  if (ds.empty()) throw ValidationError("training dataset '" + ds.name + "' is empty");
  if (ds.num_classes != init.config.num_classes || ds.feature_dim != init.config.input_dim)
    throw ValidationError("dataset '" + ds.name + "' does not match the model's K or D");
  const auto* modulated = std::get_if<Modulated>(&loss_mode);
  if (modulated && (modulated->transition.rows() != ds.num_classes ||
                    modulated->transition.cols() != ds.num_classes))
    throw ValidationError("transition matrix does not match K");

  const auto start = std::chrono::steady_clock::now();
  const auto seconds_since_start = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  StageResult result;
  result.config = cfg;
  if (cfg.epochs == 0) {
    result.params = init;
    return result;
  }

  const auto counts = class_counts(ds);
  const ClassWeights weights = median_frequency_weights(counts);

  ModelParams params = init;
  params.config.dropout_keep_prob = cfg.dropout_keep_prob;
  ParamGrads velocity = ParamGrads::zeros_like(params);

  const Eigen::MatrixXd features = feature_matrix(ds);
  const std::vector<int> labels = labels_of(ds);
  const auto n = static_cast<Eigen::Index>(ds.size());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.learning_rate_at(epoch);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Rng shuffle_rng(derive_seed(cfg.shuffle_seed, {static_cast<std::uint64_t>(epoch)}));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    std::uint64_t batch_index = 0;
    for (Eigen::Index begin = 0; begin < n; begin += cfg.batch_size, ++batch_index) {
      const Eigen::Index rows = std::min<Eigen::Index>(cfg.batch_size, n - begin);
      Eigen::MatrixXd xb(rows, features.cols());
      std::vector<int> yb(static_cast<std::size_t>(rows));
      for (Eigen::Index r = 0; r < rows; ++r) {
        const auto src = order[static_cast<std::size_t>(begin + r)];
        xb.row(r) = features.row(src);
        yb[static_cast<std::size_t>(r)] = labels[static_cast<std::size_t>(src)];
      }

      const auto fwd = forward(
          params, xb,
          TrainMode{derive_seed(cfg.shuffle_seed, {static_cast<std::uint64_t>(epoch), batch_index, 1})});
      const LossReport loss =
          modulated ? modulated_cross_entropy(fwd.posteriors, yb, modulated->transition, weights,
                                              modulated->options)
                    : plain_weighted_cross_entropy(fwd.posteriors, yb, weights);
      const std::string where =
          " at epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch_index);
      if (!std::isfinite(loss.loss)) throw DivergenceError("non-finite loss" + where);
      if (cfg.verbose && verbose_out)
        *verbose_out << "epoch " << epoch << " batch " << batch_index << " loss " << loss.loss
                     << '\n';

      const ParamGrads grads = backward(params, fwd.cache, loss.grad_logits);
      try {
        sgd_momentum_step(params, grads, velocity, lr, cfg.momentum);
      } catch (const DivergenceError& e) {
        throw DivergenceError(e.what() + where);
      }
      loss_sum += loss.per_example.sum();
    }

    const auto predicted = argmax_rows(forward(params, features, EvalMode{}).posteriors);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) correct += predicted[i] == labels[i];
    result.log.push_back(EpochLog{epoch, lr, loss_sum / static_cast<double>(n),
                                  static_cast<double>(correct) / static_cast<double>(n),
                                  seconds_since_start()});
  }
  result.params = std::move(params);
  result.wall_seconds = seconds_since_start();
  return result;
}

std::string stage_log_jsonl(const StageResult& stage) {
  std::string out;
  for (const auto& e : stage.log) {
    const nlohmann::ordered_json line{{"epoch", e.epoch},
                                      {"lr", e.lr},
                                      {"mean_loss", e.mean_loss},
                                      {"train_accuracy", e.train_accuracy},
                                      {"elapsed_s", e.elapsed_s}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::string_view to_string(Arm arm) {
  switch (arm) {
    case Arm::BL1: return "BL1";
    case Arm::BL2: return "BL2";
    case Arm::Proposed: return "Proposed";
  }
  return "?";
}

Arm parse_arm(std::string_view name) {
  if (name == "BL1") return Arm::BL1;
  if (name == "BL2") return Arm::BL2;
  if (name == "Proposed") return Arm::Proposed;
  throw ValidationError("unknown arm '" + std::string(name) + "' (expected BL1, BL2 or Proposed)");
}

WebCorpusSource::WebCorpusSource(WebCorpus corpus) : corpus_(std::move(corpus)) {}

WebCorpusSource::WebCorpusSource(std::function<WebCorpus()> loader) : loader_(std::move(loader)) {}

const WebCorpus& WebCorpusSource::get() {
  ++accesses_;
  if (!corpus_) {
    if (!loader_) throw Error("web corpus source has neither data nor loader");
    corpus_ = loader_();
  }
  return *corpus_;
}

namespace {

Dataset web_training_set(const WebCorpus& web, const Dataset& clean) {
  if (web.num_classes != clean.num_classes || web.feature_dim != clean.feature_dim)
    throw ValidationError("web corpus and clean data disagree on K or D");
  return flatten_web(web);
}

}  // namespace

ArmResult run_arm(Arm arm, const Dataset& clean_train, WebCorpusSource& web,
                  const TrainConfig& cfg_web, const TrainConfig& cfg_clean,
                  const ModelConfig& model_cfg, const ArmOptions& options) {
  if (clean_train.num_classes != model_cfg.num_classes ||
      clean_train.feature_dim != model_cfg.input_dim)
    throw ValidationError("clean data does not match the model's K or D");

  ArmResult result;
  result.arm = arm;
  const ModelParams fresh = init_params(model_cfg);
  std::ostream* vout = options.verbose_out;

  switch (arm) {
    case Arm::BL1:
      result.stages.push_back(train_stage(fresh, clean_train, PlainWeighted{}, cfg_clean, vout));
      break;
    case Arm::BL2: {
      const Dataset web_ds = web_training_set(web.get(), clean_train);
      result.stages.push_back(train_stage(fresh, web_ds, PlainWeighted{}, cfg_web, vout));
      break;
    }
    case Arm::Proposed: {
      result.oracle = train_stage(fresh, clean_train, PlainWeighted{}, cfg_clean, vout);
      TransitionMatrix t = options.force_identity_transition
                               ? TransitionMatrix::identity(model_cfg.num_classes)
                               : estimate_transition(result.oracle->params, web.get());
      const Dataset web_ds = web_training_set(web.get(), clean_train);
      result.stages.push_back(
          train_stage(fresh, web_ds, Modulated{t.entries, options.modulation}, cfg_web, vout));
      result.transition = std::move(t);
      break;
    }
  }
  result.web_accesses_before_finetune = web.access_count();
  if (arm != Arm::BL1)
    result.stages.push_back(
        train_stage(result.stages.back().params, clean_train, PlainWeighted{}, cfg_clean, vout));
  result.web_accesses_total = web.access_count();
  result.final_params = result.stages.back().params;
  return result;
}

}  // namespace wsl
