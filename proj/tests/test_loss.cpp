#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "support/test_util.hpp"
#include "wsl/error.hpp"
#include "wsl/loss.hpp"
#include "wsl/model.hpp"

using namespace wsl;

namespace {

ClassWeights weights(std::initializer_list<double> w) {
  ClassWeights out;
  out.w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(w.size()));
  Eigen::Index i = 0;
  for (double v : w) out.w(i++) = v;
  return out;
}

Eigen::MatrixXd row(std::initializer_list<double> v) {
  Eigen::MatrixXd m(1, static_cast<Eigen::Index>(v.size()));
  Eigen::Index j = 0;
  for (double x : v) m(0, j++) = x;
  return m;
}

struct Instance {
  Eigen::MatrixXd logits;
  std::vector<int> labels;
  ClassWeights w;
  Eigen::MatrixXd t;
};

Instance random_instance(Rng& rng) {
  std::uniform_int_distribution<int> kd(2, 6), nd(1, 12);
  std::normal_distribution<double> g(0.0, 2.0);
  std::uniform_real_distribution<double> wd(0.1, 5.0);
  Instance in;
  const int k = kd(rng), n = nd(rng);
  in.logits.resize(n, k);
  for (Eigen::Index i = 0; i < in.logits.size(); ++i) in.logits.data()[i] = g(rng);
  std::uniform_int_distribution<int> ld(0, k - 1);
  for (int i = 0; i < n; ++i) in.labels.push_back(ld(rng));
  in.w.w.resize(k);
  for (int c = 0; c < k; ++c) in.w.w(c) = wd(rng);
  in.t = test::random_stochastic(k, rng);
  return in;
}

/// Independent long-double reference of softmax followed by the (optionally
/// renormalized) modulated loss, batch mean.
long double reference_loss(const Eigen::MatrixXd& z, const Instance& in, bool renormalize) {
  const auto n = z.rows(), k = z.cols();
  long double total = 0.0L;
  for (Eigen::Index i = 0; i < n; ++i) {
    long double m = z(i, 0);
    for (Eigen::Index j = 1; j < k; ++j) m = std::max<long double>(m, z(i, j));
    std::vector<long double> p(static_cast<std::size_t>(k));
    long double sum = 0.0L;
    for (Eigen::Index j = 0; j < k; ++j) sum += p[static_cast<std::size_t>(j)] = std::exp(z(i, j) - m);
    for (auto& v : p) v /= sum;
    const int c = in.labels[static_cast<std::size_t>(i)];
    long double s = 0.0L, mass = 0.0L;
    for (Eigen::Index r = 0; r < k; ++r)
      for (Eigen::Index j = 0; j < k; ++j) {
        const long double term = in.t(r, j) * p[static_cast<std::size_t>(j)];
        if (r == c) s += term;
        mass += term;
      }
    if (renormalize) s /= mass;
    total += -in.w.w(c) * std::log(s);
  }
  return total / n;
}

/// Central differences (h = 1e-5) of the reference loss against the
/// analytic logit gradient, relative error floored at 1e-8.
double fd_max_rel_error(const Instance& in, const ModulationOptions& opt, double h) {
  const auto rep = modulated_cross_entropy(softmax_rows(in.logits), in.labels, in.t, in.w, opt);
  CHECK(static_cast<double>(reference_loss(in.logits, in, opt.renormalize_modulated)) ==
        doctest::Approx(rep.loss).epsilon(1e-13));
  double worst = 0.0;
  for (Eigen::Index i = 0; i < in.logits.size(); ++i) {
    Eigen::MatrixXd plus = in.logits, minus = in.logits;
    plus.data()[i] += h;
    minus.data()[i] -= h;
    const long double diff = reference_loss(plus, in, opt.renormalize_modulated) -
                             reference_loss(minus, in, opt.renormalize_modulated);
    const double numeric = static_cast<double>(diff / (plus.data()[i] - minus.data()[i]));
    const double analytic = rep.grad_logits.data()[i];
    worst = std::max(worst, std::abs(analytic - numeric) /
                                std::max({std::abs(analytic), std::abs(numeric), 1e-8}));
  }
  return worst;
}

}  // namespace

TEST_CASE("median-frequency weights: (10,20,40) -> (2, 1, 0.5) exactly") {
  const std::vector<std::size_t> counts{10, 20, 40};
  const auto w = median_frequency_weights(counts);
  CHECK(w.w(0) == 2.0);
  CHECK(w.w(1) == 1.0);
  CHECK(w.w(2) == 0.5);
  CHECK(w.source_counts == counts);
}

TEST_CASE("median-frequency weights: uniform counts give exactly one") {
  const std::vector<std::size_t> counts{7, 7, 7, 7};
  CHECK(median_frequency_weights(counts).w == Eigen::VectorXd::Ones(4));
}

TEST_CASE("median-frequency weights: (1,1,98)") {
  const std::vector<std::size_t> counts{1, 1, 98};
  const auto w = median_frequency_weights(counts);
  CHECK(w.w(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(w.w(1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(w.w(2) == doctest::Approx(0.01 / 0.98).epsilon(1e-14));
}

TEST_CASE("median-frequency weights: even K uses the mean of the middle pair") {
  const std::vector<std::size_t> counts{1, 2, 3, 4};
  const auto w = median_frequency_weights(counts);
  CHECK(w.w(0) == doctest::Approx(2.5));
  CHECK(w.w(1) == doctest::Approx(1.25));
  CHECK(w.w(2) == doctest::Approx(0.25 / 0.3));
  CHECK(w.w(3) == doctest::Approx(0.625));
}

TEST_CASE("median-frequency weights: zero count is an error") {
  const std::vector<std::size_t> counts{3, 0, 2};
  CHECK_THROWS_WITH_AS(median_frequency_weights(counts), doctest::Contains("class absent from training data"),
                       ValidationError);
}

TEST_CASE("modulated CE: hand-computed value") {
  Eigen::MatrixXd t(2, 2);
  t << 0.9, 0.1, 0.2, 0.8;
  const std::vector<int> y{0};
  const auto r = modulated_cross_entropy(row({0.6, 0.4}), y, t, weights({1.0, 1.0}));
  CHECK(r.loss == doctest::Approx(-std::log(0.58)).epsilon(1e-14));
  CHECK(r.loss == doctest::Approx(0.54473).epsilon(1e-5));
}

TEST_CASE("modulated CE: uniform T destroys the gradient") {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    auto in = random_instance(rng);
    const auto k = in.t.rows();
    in.t = Eigen::MatrixXd::Constant(k, k, 1.0 / static_cast<double>(k));
    const auto r = modulated_cross_entropy(softmax_rows(in.logits), in.labels, in.t, in.w);
    for (std::size_t i = 0; i < in.labels.size(); ++i)
      CHECK(r.per_example(static_cast<Eigen::Index>(i)) ==
            doctest::Approx(-in.w.w(in.labels[i]) * std::log(1.0 / static_cast<double>(k))).epsilon(1e-12));
    CHECK(r.grad_logits.cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("plain CE: hand-computed values") {
  const std::vector<int> y1{1};
  CHECK(plain_weighted_cross_entropy(row({0.75, 0.25}), y1, weights({1.0, 2.0})).loss ==
        doctest::Approx(2.77259).epsilon(1e-5));
  CHECK(plain_weighted_cross_entropy(row({0.75, 0.25}), y1, weights({1.0, 2.0})).loss ==
        doctest::Approx(-2.0 * std::log(0.25)).epsilon(1e-15));
  const std::vector<int> y0{0};
  CHECK(plain_weighted_cross_entropy(row({1.0, 0.0}), y0, weights({1.0, 1.0})).loss == 0.0);
}

TEST_CASE("scalar loss is the batch mean of per-example losses") {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto in = random_instance(rng);
    const auto r = modulated_cross_entropy(softmax_rows(in.logits), in.labels, in.t, in.w);
    CHECK(r.loss == doctest::Approx(r.per_example.mean()).epsilon(1e-14));
    CHECK((r.per_example.array() >= 0.0).all());
  }
}

TEST_CASE("property: identity T equals plain weighted CE on 1000 instances") {
  Rng rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto in = random_instance(rng);
    const auto k = in.t.rows();
    const auto p = softmax_rows(in.logits);
    const auto m = modulated_cross_entropy(p, in.labels, Eigen::MatrixXd::Identity(k, k), in.w);
    const auto q = plain_weighted_cross_entropy(p, in.labels, in.w);
    REQUIRE(std::abs(m.loss - q.loss) < 1e-12);
    REQUIRE((m.per_example - q.per_example).cwiseAbs().maxCoeff() < 1e-15);
    REQUIRE((m.grad_logits - q.grad_logits).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("property: logit gradient matches central differences") {
  Rng rng(4);
  double worst = 0.0, worst_renorm = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto in = random_instance(rng);
    worst = std::max(worst, fd_max_rel_error(in, {}, 1e-5));
    worst_renorm = std::max(worst_renorm, fd_max_rel_error(in, {true}, 1e-5));
  }
  CHECK(worst < 1e-6);
  CHECK(worst_renorm < 1e-6);
}

TEST_CASE("property: raising p(c|x) never raises the loss for diagonally dominant T") {
  Rng rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::MatrixXd t = test::random_stochastic(3, rng);
    for (int i = 0; i < 3; ++i) {
      Eigen::Index j;
      t.row(i).maxCoeff(&j);
      std::swap(t(i, i), t(i, j));
    }
    const int c = static_cast<int>(rng() % 3);
    Eigen::Vector3d rest(u(rng), u(rng), u(rng));
    rest(c) = 0.0;
    rest /= rest.sum();
    const std::vector<int> y{c};
    double prev = std::numeric_limits<double>::infinity();
    for (int step = 0; step <= 50; ++step) {
      const double pc = step / 50.0;
      Eigen::MatrixXd p = (rest * (1.0 - pc)).transpose();
      p(0, c) = pc;
      const double l = modulated_cross_entropy(p, y, t, weights({1.0, 1.0, 1.0})).loss;
      CHECK(l <= prev + 1e-12);
      prev = l;
    }
  }
}

TEST_CASE("clamp: one-hot posterior on a zero entry of sparse T stays finite") {
  const Eigen::MatrixXd t = Eigen::MatrixXd::Identity(3, 3);
  const std::vector<int> y{0};
  const auto r = modulated_cross_entropy(row({0.0, 1.0, 0.0}), y, t, weights({2.0, 1.0, 1.0}));
  CHECK(std::isfinite(r.loss));
  CHECK(r.loss == doctest::Approx(-2.0 * std::log(kLogClamp)));
  CHECK(r.grad_logits.allFinite());
  const auto q = plain_weighted_cross_entropy(row({0.0, 1.0, 0.0}), y, weights({2.0, 1.0, 1.0}));
  CHECK(q.loss == r.loss);
}

TEST_CASE("renormalized variant divides by the total modulated mass") {
  Eigen::MatrixXd t(2, 2);
  t << 0.9, 0.1, 0.4, 0.6;
  const std::vector<int> y{0};
  const auto r = modulated_cross_entropy(row({0.6, 0.4}), y, t, weights({1.0, 1.0}), {true});
  const double s0 = 0.9 * 0.6 + 0.1 * 0.4, s1 = 0.4 * 0.6 + 0.6 * 0.4;
  CHECK(r.loss == doctest::Approx(-std::log(s0 / (s0 + s1))).epsilon(1e-14));
}

TEST_CASE("loss input errors") {
  const std::vector<int> y{0};
  const std::vector<int> y_bad{2};
  const std::vector<int> y_two{0, 1};
  const auto p = row({0.5, 0.5});
  CHECK_THROWS_AS(modulated_cross_entropy(p, y, Eigen::MatrixXd::Identity(3, 3), weights({1, 1})), ValidationError);
  CHECK_THROWS_AS(plain_weighted_cross_entropy(p, y_bad, weights({1, 1})), ValidationError);
  CHECK_THROWS_AS(plain_weighted_cross_entropy(p, y_two, weights({1, 1})), ValidationError);
  CHECK_THROWS_AS(plain_weighted_cross_entropy(p, y, weights({1, 1, 1})), ValidationError);
}

TEST_CASE("TransitionMatrix overload agrees with the raw matrix form") {
  Rng rng(6);
  const auto in = random_instance(rng);
  TransitionMatrix tm;
  tm.entries = in.t;
  const auto p = softmax_rows(in.logits);
  CHECK(modulated_cross_entropy(p, in.labels, tm, in.w).loss ==
        modulated_cross_entropy(p, in.labels, in.t, in.w).loss);
}
