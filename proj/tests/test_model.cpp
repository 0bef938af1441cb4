#include <doctest.h>

#include <cmath>
#include <random>

#include "support/gradcheck.hpp"
#include "support/test_util.hpp"
#include "wsl/error.hpp"
#include "wsl/eval.hpp"
#include "wsl/model.hpp"
#include "wsl/train.hpp"

using namespace wsl;

namespace {

ModelConfig cfg(int d, std::vector<int> hidden, int k, double keep = 1.0, std::uint64_t seed = 7) {
  ModelConfig c;
  c.input_dim = d;
  c.hidden_sizes = std::move(hidden);
  c.num_classes = k;
  c.dropout_keep_prob = keep;
  c.init_seed = seed;
  return c;
}

Eigen::MatrixXd random_batch(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
  return x;
}

bool same(const ModelParams& a, const ModelParams& b) {
  if (!(a.config == b.config) || a.layers.size() != b.layers.size()) return false;
  for (std::size_t l = 0; l < a.layers.size(); ++l)
    if (a.layers[l].weights != b.layers[l].weights || a.layers[l].bias != b.layers[l].bias) return false;
  return true;
}

}  // namespace

TEST_CASE("init_params: shapes chain, biases zero, deterministic") {
  const auto p = init_params(cfg(4, {8}, 3));
  REQUIRE(p.layers.size() == 2);
  CHECK(p.layers[0].weights.rows() == 4);
  CHECK(p.layers[0].weights.cols() == 8);
  CHECK(p.layers[1].weights.rows() == 8);
  CHECK(p.layers[1].weights.cols() == 3);
  for (const auto& l : p.layers) CHECK(l.bias.isZero(0.0));
  CHECK(same(p, init_params(cfg(4, {8}, 3))));
  CHECK(!same(p, init_params(cfg(4, {8}, 3, 1.0, 8))));
}

TEST_CASE("init_params: weight scale follows sqrt(2 / fan_in)") {
  const auto p = init_params(cfg(200, {300}, 2));
  const auto& w = p.layers[0].weights;
  const double var = w.array().square().mean() - std::pow(w.mean(), 2);
  CHECK(std::sqrt(var) == doctest::Approx(std::sqrt(2.0 / 200)).epsilon(0.02));
  CHECK(std::abs(w.mean()) < 0.005);
}

TEST_CASE("ModelConfig validation") {
  CHECK_THROWS_AS(init_params(cfg(4, {8}, 1)), ValidationError);
  CHECK_THROWS_AS(init_params(cfg(0, {8}, 2)), ValidationError);
  CHECK_THROWS_AS(init_params(cfg(4, {0}, 2)), ValidationError);
  CHECK_THROWS_AS(init_params(cfg(4, {8}, 2, 0.0)), ValidationError);
  CHECK_THROWS_AS(init_params(cfg(4, {8}, 2, 1.5)), ValidationError);
  auto c = cfg(4, {8}, 2);
  c.init_scale = "xavier";
  CHECK_THROWS_AS(init_params(c), ValidationError);
}

TEST_CASE("softmax: zero logits give a uniform row; (ln 3, 0) gives (0.75, 0.25)") {
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(1, 4);
  CHECK(softmax_rows(zero).isApprox(Eigen::MatrixXd::Constant(1, 4, 0.25)));
  Eigen::MatrixXd l(1, 2);
  l << std::log(3.0), 0.0;
  const auto p = softmax_rows(l);
  CHECK(p(0, 0) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(p(0, 1) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("softmax: stable and normalized for logits of magnitude 1e3") {
  Rng rng(3);
  std::uniform_real_distribution<double> u(-1000.0, 1000.0);
  Eigen::MatrixXd l(200, 6);
  for (Eigen::Index i = 0; i < l.size(); ++i) l.data()[i] = u(rng);
  l(0, 0) = 1000.0;
  l(0, 1) = 1000.0;
  const auto p = softmax_rows(l);
  CHECK(p.allFinite());
  for (Eigen::Index r = 0; r < p.rows(); ++r) CHECK(std::abs(p.row(r).sum() - 1.0) < 1e-9);
  CHECK((p.array() >= 0.0).all());
  CHECK(p(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("forward: keep = 1 makes train and eval modes identical") {
  const auto p = init_params(cfg(5, {7, 6}, 3, 1.0));
  const auto x = random_batch(9, 5, 1);
  CHECK(forward(p, x, TrainMode{42}).posteriors == forward(p, x, EvalMode{}).posteriors);
  CHECK(forward(p, x, EvalMode{}).posteriors == forward(p, x, EvalMode{}).posteriors);
}

TEST_CASE("forward: dropout masks are seeded, scaled by 1/keep, and absent in eval") {
  const auto p = init_params(cfg(5, {40}, 3, 0.8));
  const auto x = random_batch(50, 5, 1);
  const auto a = forward(p, x, TrainMode{1});
  const auto b = forward(p, x, TrainMode{1});
  const auto c = forward(p, x, TrainMode{2});
  CHECK(a.posteriors == b.posteriors);
  CHECK(a.posteriors != c.posteriors);
  REQUIRE(a.cache.dropout_masks.size() == 1);
  const auto& m = a.cache.dropout_masks[0];
  std::size_t kept = 0;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double v = m.data()[i];
    CHECK((v == 0.0 || v == 1.0 / 0.8));
    kept += v != 0.0;
  }
  CHECK(static_cast<double>(kept) / m.size() == doctest::Approx(0.8).epsilon(0.05));
  CHECK(forward(p, x, EvalMode{}).cache.dropout_masks.empty());
}

TEST_CASE("forward: rejects non-finite input and wrong width") {
  const auto p = init_params(cfg(3, {4}, 2));
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 3);
  x(1, 2) = std::nan("");
  CHECK_THROWS_AS(forward(p, x, EvalMode{}), ValidationError);
  CHECK_THROWS_AS(forward(p, Eigen::MatrixXd::Zero(2, 4), EvalMode{}), ValidationError);
}

TEST_CASE("backward: zero upstream gradient yields zero parameter gradients") {
  const auto p = init_params(cfg(4, {5, 5}, 3, 0.8));
  const auto fwd = forward(p, random_batch(6, 4, 2), TrainMode{9});
  const auto g = backward(p, fwd.cache, Eigen::MatrixXd::Zero(6, 3));
  for (const auto& l : g.layers) {
    CHECK(l.weights.isZero(0.0));
    CHECK(l.bias.isZero(0.0));
  }
}

TEST_CASE("backward: cache or shape mismatch is an error") {
  const auto p = init_params(cfg(4, {5}, 3));
  const auto q = init_params(cfg(4, {6}, 3));
  const auto fwd = forward(p, random_batch(6, 4, 2), EvalMode{});
  CHECK_THROWS_AS(backward(q, fwd.cache, Eigen::MatrixXd::Zero(6, 3)), ValidationError);
  CHECK_THROWS_AS(backward(p, fwd.cache, Eigen::MatrixXd::Zero(5, 3)), ValidationError);
}

TEST_CASE("backward: batch gradient equals the sum of per-example gradients") {
  const auto p = init_params(cfg(4, {6, 5}, 3, 1.0));
  const auto x = random_batch(7, 4, 3);
  const Eigen::MatrixXd up = random_batch(7, 3, 4);
  const auto whole = backward(p, forward(p, x, EvalMode{}).cache, up);
  ParamGrads sum = ParamGrads::zeros_like(p);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const auto gi = backward(p, forward(p, x.row(i), EvalMode{}).cache, up.row(i));
    for (std::size_t l = 0; l < sum.layers.size(); ++l) {
      sum.layers[l].weights += gi.layers[l].weights;
      sum.layers[l].bias += gi.layers[l].bias;
    }
  }
  for (std::size_t l = 0; l < sum.layers.size(); ++l) {
    CHECK((whole.layers[l].weights - sum.layers[l].weights).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((whole.layers[l].bias - sum.layers[l].bias).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("backward: matches central differences of the modulated loss") {
  Rng rng(77);
  const std::vector<int> y{0, 1, 2, 3, 1, 2, 0, 3};
  const Eigen::MatrixXd t = test::random_stochastic(4, rng);
  ClassWeights w;
  w.w = Eigen::Vector4d(0.5, 1.3, 2.0, 0.9);
  const auto x = random_batch(8, 6, 5);

  SUBCASE("eval mode") {
    const auto p = init_params(cfg(6, {8, 8}, 4, 1.0, 11));
    const auto r = test::gradcheck_modulated(p, x, y, t, w, EvalMode{}, 150, 1e-4, 1);
    CHECK(r.max_rel_error < 1e-5);
  }
  SUBCASE("through fixed dropout masks") {
    const auto p = init_params(cfg(6, {8, 8}, 4, 0.8, 12));
    const auto r = test::gradcheck_modulated(p, x, y, t, w, TrainMode{5}, 150, 1e-4, 2);
    CHECK(r.max_rel_error < 1e-5);
  }
}

TEST_CASE("predict: deterministic, normalized, order-preserving") {
  const Dataset ds = test::toy_dataset(3, 4, 10, 2.0, 1.0, 1);
  const auto p = init_params(cfg(4, {6}, 3, 0.5));
  const auto a = predict(p, ds);
  CHECK(a == predict(p, ds));
  for (Eigen::Index r = 0; r < a.rows(); ++r) CHECK(std::abs(a.row(r).sum() - 1.0) < 1e-9);
  Dataset single = ds;
  single.examples = {ds.examples[5]};
  CHECK(predict(p, single).row(0) == a.row(5));
  CHECK_THROWS_AS(predict(init_params(cfg(5, {6}, 3)), ds), ValidationError);
}

TEST_CASE("predict: separable toy set is learned to > 0.95") {
  const Dataset ds = test::toy_dataset(2, 3, 60, 4.0, 0.7, 2);
  TrainConfig tc;
  tc.epochs = 30;
  tc.batch_size = 16;
  tc.dropout_keep_prob = 1.0;
  const auto r = train_stage(init_params(cfg(3, {8}, 2)), ds, PlainWeighted{}, tc);
  const auto pred = argmax_rows(predict(r.params, ds));
  std::size_t ok = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) ok += pred[i] == ds.examples[i].label;
  CHECK(static_cast<double>(ok) / ds.size() > 0.95);
}

TEST_CASE("penultimate_features: shape, determinism, needs a hidden layer") {
  const Dataset ds = test::toy_dataset(3, 4, 5, 2.0, 1.0, 1);
  const auto p = init_params(cfg(4, {6, 9}, 3, 0.5));
  const auto f = penultimate_features(p, ds);
  CHECK(f.rows() == 15);
  CHECK(f.cols() == 9);
  CHECK((f.array() >= 0.0).all());
  CHECK(f == penultimate_features(p, ds));
  CHECK_THROWS_AS(penultimate_features(init_params(cfg(4, {}, 3)), ds), ValidationError);
}

TEST_CASE("checkpoint: save -> load -> save is byte-identical and value-exact") {
  const auto p = init_params(cfg(6, {8, 8}, 4, 0.8, 3));
  const std::string bytes = serialize_checkpoint(p);
  CHECK(bytes.substr(0, 8) == "WSLCKPT1");
  const auto back = deserialize_checkpoint(bytes);
  CHECK(same(p, back));
  CHECK(serialize_checkpoint(back) == bytes);

  test::TempDir dir("ckpt");
  save_checkpoint(p, dir / "m.wslckpt");
  CHECK(same(load_checkpoint(dir / "m.wslckpt"), init_params(cfg(6, {8, 8}, 4, 0.8, 3))));
}

TEST_CASE("checkpoint: expectation, magic and truncation errors") {
  const auto p = init_params(cfg(6, {8}, 4));
  const std::string bytes = serialize_checkpoint(p);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes, {5, std::nullopt}), ValidationError);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes, {std::nullopt, 7}), ValidationError);
  CHECK_NOTHROW(deserialize_checkpoint(bytes, {4, 6}));
  std::string bad = bytes;
  bad[7] = '2';
  CHECK_THROWS_AS(deserialize_checkpoint(bad), Error);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, bytes.size() - 8)), Error);
  CHECK_THROWS_AS(deserialize_checkpoint(""), Error);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent.wslckpt"), Error);
}
