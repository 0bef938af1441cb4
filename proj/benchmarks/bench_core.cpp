#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "wsl/data.hpp"
#include "wsl/eval.hpp"
#include "wsl/loss.hpp"
#include "wsl/model.hpp"
#include "wsl/rng.hpp"
#include "wsl/train.hpp"

namespace {

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  wsl::Rng rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

wsl::ModelConfig mlp(int d, int k) {
  wsl::ModelConfig c;
  c.input_dim = d;
  c.hidden_sizes = {32, 32};
  c.num_classes = k;
  c.dropout_keep_prob = 0.8;
  return c;
}

void BM_ForwardBackward(benchmark::State& state) {
  const auto batch = state.range(0);
  const auto params = wsl::init_params(mlp(8, 5));
  const auto x = gaussian(batch, 8, 1);
  const Eigen::MatrixXd up = gaussian(batch, 5, 2);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const auto fwd = wsl::forward(params, x, wsl::TrainMode{seed++});
    benchmark::DoNotOptimize(wsl::backward(params, fwd.cache, up));
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_ForwardBackward)->Arg(16)->Arg(32)->Arg(256);

void BM_ModulatedLoss(benchmark::State& state) {
  const auto batch = state.range(0);
  const auto p = wsl::softmax_rows(gaussian(batch, 5, 3));
  std::vector<int> y(static_cast<std::size_t>(batch));
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<int>(i % 5);
  const Eigen::MatrixXd t = wsl::uniform_off_diagonal_kernel(5, 0.7);
  wsl::ClassWeights w;
  w.w = Eigen::VectorXd::Ones(5);
  for (auto _ : state) benchmark::DoNotOptimize(wsl::modulated_cross_entropy(p, y, t, w));
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_ModulatedLoss)->Arg(32)->Arg(1024);

void BM_RocAuc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  wsl::Rng rng(4);
  std::uniform_real_distribution<double> u;
  std::vector<double> scores(n);
  std::vector<bool> pos(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = u(rng);
    pos[i] = i % 3 == 0;
  }
  for (auto _ : state) benchmark::DoNotOptimize(wsl::roc_auc_one_vs_rest(scores, pos));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RocAuc)->RangeMultiplier(8)->Range(64, 32768)->Complexity(benchmark::oNLogN);

void BM_TrainEpoch(benchmark::State& state) {
  wsl::ClassMixtureSpec spec;
  spec.num_classes = 5;
  spec.feature_dim = 8;
  spec.means = wsl::axis_class_means(5, 8, 2.0);
  spec.counts.assign(5, static_cast<int>(state.range(0)) / 5);
  spec.groups_per_class = 4;
  const auto ds = wsl::synth_clean(spec);
  const auto init = wsl::init_params(mlp(8, 5));
  wsl::TrainConfig cfg;
  cfg.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(wsl::train_stage(init, ds, wsl::PlainWeighted{}, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainEpoch)->Arg(200)->Arg(3400)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
