#include "wsl/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "wsl/error.hpp"
#include "wsl/rng.hpp"

namespace wsl {

namespace {

void check_features(const std::vector<double>& f, int dim, const std::string& id) {
  if (static_cast<int>(f.size()) != dim)
    throw ValidationError("example '" + id + "' has " + std::to_string(f.size()) +
                          " features, expected " + std::to_string(dim));
  for (double v : f)
    if (!std::isfinite(v)) throw ValidationError("example '" + id + "' has a non-finite feature");
}

}  // namespace

void Dataset::validate() const {
  if (num_classes < 1) throw ValidationError("dataset '" + name + "': num_classes must be >= 1");
  if (feature_dim < 1) throw ValidationError("dataset '" + name + "': feature_dim must be >= 1");
  std::unordered_set<std::string> ids;
  ids.reserve(examples.size());
  for (const auto& ex : examples) {
    check_features(ex.features, feature_dim, ex.id);
    if (ex.label < 0 || ex.label >= num_classes)
      throw ValidationError("example '" + ex.id + "' has label " + std::to_string(ex.label) +
                            " outside [0, " + std::to_string(num_classes) + ")");
    if (!ids.insert(ex.id).second) throw ValidationError("duplicate example id '" + ex.id + "'");
  }
}

Eigen::MatrixXd feature_matrix(const Dataset& ds) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(ds.size()), ds.feature_dim);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& f = ds.examples[i].features;
    if (static_cast<int>(f.size()) != ds.feature_dim)
      throw ValidationError("example '" + ds.examples[i].id + "' does not match feature_dim");
    for (int d = 0; d < ds.feature_dim; ++d) x(static_cast<Eigen::Index>(i), d) = f[d];
  }
  return x;
}

std::vector<int> labels_of(const Dataset& ds) {
  std::vector<int> out;
  out.reserve(ds.size());
  for (const auto& ex : ds.examples) out.push_back(ex.label);
  return out;
}

std::vector<std::size_t> class_counts(const Dataset& ds) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(std::max(ds.num_classes, 0)), 0);
  for (const auto& ex : ds.examples) {
    if (ex.label < 0 || ex.label >= ds.num_classes)
      throw ValidationError("label out of range in '" + ds.name + "'");
    ++counts[static_cast<std::size_t>(ex.label)];
  }
  return counts;
}

std::size_t WebCorpus::member_count() const noexcept {
  std::size_t n = 0;
  for (const auto& b : bags) n += b.members.size();
  return n;
}

void WebCorpus::validate() const {
  if (num_classes < 1 || feature_dim < 1)
    throw ValidationError("web corpus needs num_classes >= 1 and feature_dim >= 1");
  for (const auto& bag : bags) {
    if (bag.transferred_label < 0 || bag.transferred_label >= num_classes)
      throw ValidationError("bag for query '" + bag.query_id + "' has label out of range");
    for (const auto& m : bag.members) {
      check_features(m.features, feature_dim, m.id);
      if (m.label != bag.transferred_label)
        throw ValidationError("member '" + m.id + "' does not carry its bag's transferred label");
    }
    if (bag.true_labels_hidden) {
      if (bag.true_labels_hidden->size() != bag.members.size())
        throw ValidationError("bag for query '" + bag.query_id +
                              "' has a hidden-label list of the wrong length");
      for (int t : *bag.true_labels_hidden)
        if (t != kCrossDomain && (t < 0 || t >= num_classes))
          throw ValidationError("bag for query '" + bag.query_id + "' has an invalid hidden label");
    }
  }
}

void NoiseSpec::validate() const {
  const auto k = cross_category_kernel.rows();
  if (k < 1 || cross_category_kernel.cols() != k)
    throw ValidationError("cross_category_kernel must be square and nonempty");
  for (Eigen::Index i = 0; i < k; ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double v = cross_category_kernel(i, j);
      if (!(v >= 0.0 && v <= 1.0))
        throw ValidationError("cross_category_kernel entries must lie in [0, 1]");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw ValidationError("cross_category_kernel row " + std::to_string(i) + " sums to " +
                            std::to_string(sum));
  }
  if (!(cross_domain_rate >= 0.0 && cross_domain_rate <= 1.0))
    throw ValidationError("cross_domain_rate must lie in [0, 1]");
  if (bag_size < 1) throw ValidationError("bag_size must be >= 1");
}

Dataset flatten_web(const WebCorpus& corpus) {
  if (corpus.member_count() == 0) throw ValidationError("empty corpus");
  Dataset out;
  out.name = "web";
  out.num_classes = corpus.num_classes;
  out.feature_dim = corpus.feature_dim;
  out.examples.reserve(corpus.member_count());
  for (const auto& bag : corpus.bags) {
    for (const auto& m : bag.members) {
      Example ex = m;
      ex.label = bag.transferred_label;
      ex.group_id = bag.query_id;
      out.examples.push_back(std::move(ex));
    }
  }
  return out;
}

std::pair<Dataset, Dataset> grouped_split(const Dataset& ds, double train_fraction,
                                          std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ValidationError("train_fraction must lie in (0, 1)");
  if (ds.empty()) throw ValidationError("cannot split an empty dataset");

  std::vector<std::string> groups;
  std::unordered_map<std::string, std::size_t> group_size;
  for (const auto& ex : ds.examples) {
    auto [it, inserted] = group_size.try_emplace(ex.group_id, 0);
    if (inserted) groups.push_back(ex.group_id);
    ++it->second;
  }
  if (groups.size() < 2) throw ValidationError("cannot split one group");

  Rng rng(seed);
  std::shuffle(groups.begin(), groups.end(), rng);

  const double target = train_fraction * static_cast<double>(ds.size());
  std::unordered_set<std::string> train_groups;
  std::size_t train_count = 0;
  for (std::size_t g = 0; g + 1 < groups.size(); ++g) {
    if (static_cast<double>(train_count) >= target) break;
    train_groups.insert(groups[g]);
    train_count += group_size[groups[g]];
  }

  Dataset train{ds.name + "_train", ds.num_classes, ds.feature_dim, {}};
  Dataset test{ds.name + "_test", ds.num_classes, ds.feature_dim, {}};
  for (const auto& ex : ds.examples)
    (train_groups.contains(ex.group_id) ? train : test).examples.push_back(ex);
  return {std::move(train), std::move(test)};
}

}  // namespace wsl
