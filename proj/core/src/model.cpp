#include "wsl/model.hpp"

#include <cmath>
#include <random>
#include <string>

#include "wsl/error.hpp"
#include "wsl/rng.hpp"

namespace wsl {

void ModelConfig::validate() const {
  if (input_dim < 1) throw ValidationError("model input_dim must be >= 1");
  if (num_classes < 2) throw ValidationError("model num_classes must be >= 2");
  for (int h : hidden_sizes)
    if (h < 1) throw ValidationError("hidden layer sizes must be positive");
  if (!(dropout_keep_prob > 0.0 && dropout_keep_prob <= 1.0))
    throw ValidationError("dropout_keep_prob must lie in (0, 1]");
  if (init_scale != kInitSqrt2OverFanIn)
    throw ValidationError("unknown init_scale rule '" + init_scale + "'");
}

void ModelParams::validate() const {
  config.validate();
  const std::size_t expected_layers = config.hidden_sizes.size() + 1;
  if (layers.size() != expected_layers)
    throw ValidationError("expected " + std::to_string(expected_layers) + " layers, found " +
                          std::to_string(layers.size()));
  Eigen::Index fan_in = config.input_dim;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Eigen::Index fan_out = l < config.hidden_sizes.size()
                                     ? config.hidden_sizes[l]
                                     : static_cast<Eigen::Index>(config.num_classes);
    const auto& layer = layers[l];
    if (layer.weights.rows() != fan_in || layer.weights.cols() != fan_out ||
        layer.bias.size() != fan_out)
      throw ValidationError("layer " + std::to_string(l) + " has mismatched shape");
    if (!layer.weights.allFinite() || !layer.bias.allFinite())
      throw ValidationError("layer " + std::to_string(l) + " has non-finite parameters");
    fan_in = fan_out;
  }
}

ParamGrads ParamGrads::zeros_like(const ModelParams& params) {
  ParamGrads g;
  g.layers.reserve(params.layers.size());
  for (const auto& layer : params.layers)
    g.layers.push_back({Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()),
                        Eigen::VectorXd::Zero(layer.bias.size())});
  return g;
}

ModelParams init_params(const ModelConfig& cfg) {
  cfg.validate();
  ModelParams params;
  params.config = cfg;
  Rng rng(cfg.init_seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  int fan_in = cfg.input_dim;
  const std::size_t n_layers = cfg.hidden_sizes.size() + 1;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const int fan_out = l < cfg.hidden_sizes.size() ? cfg.hidden_sizes[l] : cfg.num_classes;
    const double scale = std::sqrt(2.0 / fan_in);
    Layer layer{Eigen::MatrixXd(fan_in, fan_out), Eigen::VectorXd::Zero(fan_out)};
    // Row-major draw order so the stream does not depend on Eigen's storage.
    for (int r = 0; r < fan_in; ++r)
      for (int c = 0; c < fan_out; ++c) layer.weights(r, c) = scale * normal(rng);
    params.layers.push_back(std::move(layer));
    fan_in = fan_out;
  }
  return params;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double max = logits.row(i).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
      out(i, j) = std::exp(logits(i, j) - max);
      sum += out(i, j);
    }
    out.row(i) /= sum;
  }
  return out;
}

ForwardResult forward(const ModelParams& params, const Eigen::MatrixXd& batch,
                      const ForwardMode& mode) {
  if (batch.cols() != params.config.input_dim)
    throw ValidationError("batch has " + std::to_string(batch.cols()) + " columns, model expects " +
                          std::to_string(params.config.input_dim));
  if (params.layers.empty()) throw ValidationError("model has no layers");
  if (!batch.allFinite()) throw ValidationError("non-finite input to forward");

  const auto* train = std::get_if<TrainMode>(&mode);
  const double keep = params.config.dropout_keep_prob;
  const bool dropout = train != nullptr && keep < 1.0;

  ForwardResult result;
  auto& cache = result.cache;
  const std::size_t n_hidden = params.layers.size() - 1;
  cache.inputs.reserve(params.layers.size());
  cache.hidden_pre.reserve(n_hidden);
  cache.layer_widths.push_back(batch.cols());

  Eigen::MatrixXd activ = batch;
  for (std::size_t l = 0; l < n_hidden; ++l) {
    const auto& layer = params.layers[l];
    cache.inputs.push_back(activ);
    Eigen::MatrixXd pre = activ * layer.weights;
    pre.rowwise() += layer.bias.transpose();
    activ = pre.cwiseMax(0.0);
    if (dropout) {
      Rng rng(derive_seed(train->dropout_seed, {l}));
      std::bernoulli_distribution coin(keep);
      Eigen::MatrixXd mask(activ.rows(), activ.cols());
      for (Eigen::Index i = 0; i < mask.rows(); ++i)
        for (Eigen::Index j = 0; j < mask.cols(); ++j) mask(i, j) = coin(rng) ? 1.0 / keep : 0.0;
      activ = activ.cwiseProduct(mask);
      cache.dropout_masks.push_back(std::move(mask));
    }
    cache.hidden_pre.push_back(std::move(pre));
    cache.layer_widths.push_back(layer.weights.cols());
  }
  const auto& head = params.layers.back();
  cache.inputs.push_back(activ);
  result.logits = activ * head.weights;
  result.logits.rowwise() += head.bias.transpose();
  cache.layer_widths.push_back(head.weights.cols());
  result.posteriors = softmax_rows(result.logits);
  return result;
}

ParamGrads backward(const ModelParams& params, const ForwardCache& cache,
                    const Eigen::MatrixXd& grad_logits) {
  const std::size_t n_layers = params.layers.size();
  if (cache.inputs.size() != n_layers || cache.hidden_pre.size() + 1 != n_layers ||
      cache.layer_widths.size() != n_layers + 1)
    throw ValidationError("forward cache does not match model depth");
  for (std::size_t l = 0; l < n_layers; ++l)
    if (cache.layer_widths[l] != params.layers[l].weights.rows() ||
        cache.layer_widths[l + 1] != params.layers[l].weights.cols())
      throw ValidationError("forward cache does not match layer " + std::to_string(l));
  if (!cache.dropout_masks.empty() && cache.dropout_masks.size() != cache.hidden_pre.size())
    throw ValidationError("forward cache has inconsistent dropout masks");
  if (grad_logits.rows() != cache.inputs.back().rows() ||
      grad_logits.cols() != params.layers.back().weights.cols())
    throw ValidationError("upstream gradient shape does not match the cached batch");

  ParamGrads grads;
  grads.layers.resize(n_layers);
  Eigen::MatrixXd delta = grad_logits;
  for (std::size_t l = n_layers; l-- > 0;) {
    grads.layers[l].weights = cache.inputs[l].transpose() * delta;
    grads.layers[l].bias = delta.colwise().sum().transpose();
    if (l == 0) break;
    Eigen::MatrixXd upstream = delta * params.layers[l].weights.transpose();
    if (!cache.dropout_masks.empty()) upstream = upstream.cwiseProduct(cache.dropout_masks[l - 1]);
    const auto& pre = cache.hidden_pre[l - 1];
    delta = (pre.array() > 0.0).select(upstream, 0.0);
  }
  return grads;
}

Eigen::MatrixXd predict(const ModelParams& params, const Dataset& ds) {
  if (ds.feature_dim != params.config.input_dim)
    throw ValidationError("dataset feature_dim " + std::to_string(ds.feature_dim) +
                          " does not match model input_dim " +
                          std::to_string(params.config.input_dim));
  return forward(params, feature_matrix(ds), EvalMode{}).posteriors;
}

Eigen::MatrixXd penultimate_features(const ModelParams& params, const Dataset& ds) {
  if (params.config.hidden_sizes.empty())
    throw ValidationError("model has no hidden layer to export");
  if (ds.feature_dim != params.config.input_dim)
    throw ValidationError("dataset feature_dim does not match model input_dim");
  auto fwd = forward(params, feature_matrix(ds), EvalMode{});
  return std::move(fwd.cache.inputs.back());
}

}  // namespace wsl
