#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "wsl/loss.hpp"
#include "wsl/model.hpp"
#include "wsl/rng.hpp"

namespace wsl::test {

struct GradCheckResult {
  double max_rel_error = 0.0;
  int coordinates = 0;
};

/// Central differences of the modulated loss through the whole network,
/// compared against backward() on randomly drawn parameter coordinates.
inline GradCheckResult gradcheck_modulated(const ModelParams& params, const Eigen::MatrixXd& x,
                                           const std::vector<int>& y, const Eigen::MatrixXd& t,
                                           const ClassWeights& w, const ForwardMode& mode,
                                           int coordinates, double h, std::uint64_t seed) {
  const auto loss_at = [&](const ModelParams& p) {
    return modulated_cross_entropy(forward(p, x, mode).posteriors, y, t, w).loss;
  };
  const auto fwd = forward(params, x, mode);
  const auto rep = modulated_cross_entropy(fwd.posteriors, y, t, w);
  const ParamGrads g = backward(params, fwd.cache, rep.grad_logits);

  Rng rng(seed);
  GradCheckResult out;
  for (int c = 0; c < coordinates; ++c) {
    const std::size_t l = rng() % params.layers.size();
    const auto& layer = params.layers[l];
    const auto n_w = layer.weights.size();
    const auto idx = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n_w + layer.bias.size()));
    ModelParams plus = params, minus = params;
    double analytic = 0.0;
    if (idx < n_w) {
      plus.layers[l].weights.data()[idx] += h;
      minus.layers[l].weights.data()[idx] -= h;
      analytic = g.layers[l].weights.data()[idx];
    } else {
      plus.layers[l].bias[idx - n_w] += h;
      minus.layers[l].bias[idx - n_w] -= h;
      analytic = g.layers[l].bias[idx - n_w];
    }
    const double numeric = (loss_at(plus) - loss_at(minus)) / (2.0 * h);
    const double rel =
        std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    out.max_rel_error = std::max(out.max_rel_error, rel);
    ++out.coordinates;
  }
  return out;
}

}  // namespace wsl::test
