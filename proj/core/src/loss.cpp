#include "wsl/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "wsl/error.hpp"

namespace wsl {

namespace {

void check_batch(const Eigen::MatrixXd& posteriors, std::span<const int> labels,
                 const ClassWeights& weights) {
  const auto k = posteriors.cols();
  if (static_cast<std::size_t>(posteriors.rows()) != labels.size())
    throw ValidationError("posterior rows and labels disagree in length");
  if (posteriors.rows() == 0) throw ValidationError("empty batch");
  if (weights.w.size() != k) throw ValidationError("class weight count does not match K");
  for (int c : labels)
    if (c < 0 || c >= k) throw ValidationError("label " + std::to_string(c) + " outside [0, K)");
}

}  // namespace

ClassWeights median_frequency_weights(std::span<const std::size_t> label_counts) {
  if (label_counts.empty()) throw ValidationError("no classes");
  for (std::size_t c = 0; c < label_counts.size(); ++c)
    if (label_counts[c] == 0)
      throw ValidationError("class absent from training data (class " + std::to_string(c) + ")");
  const double total =
      static_cast<double>(std::accumulate(label_counts.begin(), label_counts.end(), std::size_t{0}));

  std::vector<double> freq;
  freq.reserve(label_counts.size());
  for (std::size_t n : label_counts) freq.push_back(static_cast<double>(n) / total);
  std::vector<double> sorted = freq;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  const double median =
      sorted.size() % 2 == 1 ? sorted[mid] : (sorted[mid - 1] + sorted[mid]) / 2.0;

  ClassWeights out;
  out.w.resize(static_cast<Eigen::Index>(freq.size()));
  for (std::size_t c = 0; c < freq.size(); ++c) out.w(static_cast<Eigen::Index>(c)) = median / freq[c];
  out.source_counts.assign(label_counts.begin(), label_counts.end());
  return out;
}

// The gradient is written as w_c * (p_k - r_k) / N in both losses, with
// r_k = p_k * T(c, k) / s_c here and r_k = [k == c] in the plain loss. With
// T = I the two evaluate to the same bits.
LossReport modulated_cross_entropy(const Eigen::MatrixXd& posteriors, std::span<const int> labels,
                                   const Eigen::MatrixXd& transition, const ClassWeights& weights,
                                   const ModulationOptions& options) {
  check_batch(posteriors, labels, weights);
  const auto k = posteriors.cols();
  if (transition.rows() != k || transition.cols() != k)
    throw ValidationError("transition matrix is " + std::to_string(transition.rows()) + "x" +
                          std::to_string(transition.cols()) + ", expected " + std::to_string(k) +
                          "x" + std::to_string(k));
  const auto n = posteriors.rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  const Eigen::VectorXd col_sums = transition.colwise().sum().transpose();

  LossReport out;
  out.per_example.resize(n);
  out.grad_logits = Eigen::MatrixXd::Zero(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = labels[static_cast<std::size_t>(i)];
    const double w = weights.w(c);
    double s = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) s += transition(c, j) * posteriors(i, j);

    if (!options.renormalize_modulated) {
      out.per_example(i) = -w * std::log(std::max(s, kLogClamp));
      if (s >= kLogClamp)
        for (Eigen::Index j = 0; j < k; ++j) {
          const double r = posteriors(i, j) * transition(c, j) / s;
          out.grad_logits(i, j) = w * (posteriors(i, j) - r) * inv_n;
        }
    } else {
      double total = 0.0;
      for (Eigen::Index j = 0; j < k; ++j) total += col_sums(j) * posteriors(i, j);
      const double q = total > 0.0 ? s / total : 0.0;
      out.per_example(i) = -w * std::log(std::max(q, kLogClamp));
      if (q >= kLogClamp)
        for (Eigen::Index j = 0; j < k; ++j)
          out.grad_logits(i, j) =
              -w * posteriors(i, j) * (transition(c, j) / s - col_sums(j) / total) * inv_n;
    }
  }
  out.loss = out.per_example.sum() * inv_n;
  return out;
}

LossReport modulated_cross_entropy(const Eigen::MatrixXd& posteriors, std::span<const int> labels,
                                   const TransitionMatrix& transition, const ClassWeights& weights,
                                   const ModulationOptions& options) {
  return modulated_cross_entropy(posteriors, labels, transition.entries, weights, options);
}

LossReport plain_weighted_cross_entropy(const Eigen::MatrixXd& posteriors,
                                        std::span<const int> labels, const ClassWeights& weights) {
  check_batch(posteriors, labels, weights);
  const auto n = posteriors.rows();
  const auto k = posteriors.cols();
  const double inv_n = 1.0 / static_cast<double>(n);

  LossReport out;
  out.per_example.resize(n);
  out.grad_logits = Eigen::MatrixXd::Zero(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = labels[static_cast<std::size_t>(i)];
    const double w = weights.w(c);
    const double p = posteriors(i, c);
    out.per_example(i) = -w * std::log(std::max(p, kLogClamp));
    if (p >= kLogClamp)
      for (Eigen::Index j = 0; j < k; ++j) {
        const double r = j == c ? 1.0 : 0.0;
        out.grad_logits(i, j) = w * (posteriors(i, j) - r) * inv_n;
      }
  }
  out.loss = out.per_example.sum() * inv_n;
  return out;
}

}  // namespace wsl
