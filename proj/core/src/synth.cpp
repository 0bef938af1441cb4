#include <cmath>
#include <random>
#include <string>

#include "wsl/data.hpp"
#include "wsl/error.hpp"
#include "wsl/rng.hpp"

namespace wsl {

namespace {

std::vector<double> draw_gaussian(const std::vector<double>& mean, double sigma, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> x(mean.size());
  for (std::size_t d = 0; d < mean.size(); ++d) x[d] = mean[d] + sigma * normal(rng);
  return x;
}

// Inverse-CDF draw from one kernel row.
int draw_class(const Eigen::MatrixXd& kernel, int row, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double acc = 0.0;
  const auto k = kernel.cols();
  int last_positive = 0;
  for (Eigen::Index j = 0; j < k; ++j) {
    const double p = kernel(row, j);
    if (p <= 0.0) continue;
    last_positive = static_cast<int>(j);
    acc += p;
    if (u < acc) return static_cast<int>(j);
  }
  return last_positive;  // u landed in the rounding slack above the row sum
}

}  // namespace

void ClassMixtureSpec::validate() const {
  if (num_classes < 2) throw ValidationError("class mixture needs K >= 2");
  if (feature_dim < 1) throw ValidationError("class mixture needs D >= 1");
  if (static_cast<int>(means.size()) != num_classes)
    throw ValidationError("class mixture needs one mean per class");
  for (const auto& m : means) {
    if (static_cast<int>(m.size()) != feature_dim)
      throw ValidationError("class mean has wrong dimension");
    for (double v : m)
      if (!std::isfinite(v)) throw ValidationError("class mean is not finite");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("sigma must be > 0");
  if (static_cast<int>(counts.size()) != num_classes)
    throw ValidationError("class mixture needs one count per class");
  for (int c : counts)
    if (c < 1) throw ValidationError("every class count must be >= 1");
  if (groups_per_class < 1) throw ValidationError("groups_per_class must be >= 1");
}

Dataset synth_clean(const ClassMixtureSpec& spec) {
  spec.validate();
  Dataset ds;
  ds.name = spec.name;
  ds.num_classes = spec.num_classes;
  ds.feature_dim = spec.feature_dim;
  Rng rng(spec.seed);
  for (int c = 0; c < spec.num_classes; ++c) {
    for (int i = 0; i < spec.counts[static_cast<std::size_t>(c)]; ++i) {
      Example ex;
      ex.id = "c" + std::to_string(c) + "_n" + std::to_string(i);
      ex.group_id = "g" + std::to_string(i % spec.groups_per_class);
      ex.label = c;
      ex.features = draw_gaussian(spec.means[static_cast<std::size_t>(c)], spec.sigma, rng);
      ds.examples.push_back(std::move(ex));
    }
  }
  return ds;
}

WebCorpus synth_web_corpus(const Dataset& clean_train, const ClassMixtureSpec& classes,
                           const NoiseSpec& noise, const BackgroundSpec& background) {
  if (clean_train.empty()) throw ValidationError("clean_train is empty");
  classes.validate();
  noise.validate();
  if (!(background.scale > 0.0) || !std::isfinite(background.scale) ||
      !std::isfinite(background.mean_offset))
    throw ValidationError("background scale must be positive and finite");
  if (clean_train.num_classes != classes.num_classes ||
      clean_train.feature_dim != classes.feature_dim ||
      noise.cross_category_kernel.rows() != classes.num_classes)
    throw ValidationError("clean data, class mixture and noise kernel disagree on K or D");

  std::vector<double> outlier_center(static_cast<std::size_t>(classes.feature_dim), 0.0);
  for (const auto& m : classes.means)
    for (std::size_t d = 0; d < m.size(); ++d) outlier_center[d] += m[d] / classes.num_classes;
  for (double& v : outlier_center) v += background.mean_offset;

  WebCorpus corpus;
  corpus.num_classes = classes.num_classes;
  corpus.feature_dim = classes.feature_dim;
  corpus.bags.reserve(clean_train.size());

  Rng rng(noise.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (const auto& query : clean_train.examples) {
    WebBag bag;
    bag.query_id = query.id;
    bag.transferred_label = query.label;
    bag.true_labels_hidden.emplace();
    bag.members.reserve(static_cast<std::size_t>(noise.bag_size));
    for (int m = 0; m < noise.bag_size; ++m) {
      Example member;
      member.id = query.id + "_w" + std::to_string(m);
      member.group_id = query.id;
      member.label = query.label;
      if (unif(rng) < noise.cross_domain_rate) {
        member.features = draw_gaussian(outlier_center, background.scale, rng);
        bag.true_labels_hidden->push_back(kCrossDomain);
      } else {
        const int truth = draw_class(noise.cross_category_kernel, query.label, rng);
        member.features =
            draw_gaussian(classes.means[static_cast<std::size_t>(truth)], classes.sigma, rng);
        bag.true_labels_hidden->push_back(truth);
      }
      bag.members.push_back(std::move(member));
    }
    corpus.bags.push_back(std::move(bag));
  }
  return corpus;
}

Eigen::MatrixXd uniform_off_diagonal_kernel(int num_classes, double diagonal) {
  if (num_classes < 2) throw ValidationError("kernel needs K >= 2");
  if (!(diagonal >= 0.0 && diagonal <= 1.0)) throw ValidationError("diagonal must lie in [0, 1]");
  const double off = (1.0 - diagonal) / (num_classes - 1);
  Eigen::MatrixXd t = Eigen::MatrixXd::Constant(num_classes, num_classes, off);
  t.diagonal().setConstant(diagonal);
  return t;
}

std::vector<std::vector<double>> axis_class_means(int num_classes, int feature_dim,
                                                  double separation) {
  if (num_classes < 1 || feature_dim < 1) throw ValidationError("need K >= 1 and D >= 1");
  std::vector<std::vector<double>> means(static_cast<std::size_t>(num_classes),
                                         std::vector<double>(static_cast<std::size_t>(feature_dim), 0.0));
  for (int c = 0; c < num_classes; ++c) {
    auto& m = means[static_cast<std::size_t>(c)];
    m[static_cast<std::size_t>(c % feature_dim)] = separation;
    for (int wrap = 1; wrap <= c / feature_dim; ++wrap)
      m[static_cast<std::size_t>((c + wrap) % feature_dim)] += separation;
  }
  return means;
}

}  // namespace wsl
