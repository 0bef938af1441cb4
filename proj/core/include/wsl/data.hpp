#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace wsl {

/// Hidden-label marker for a web member drawn from outside every target class.
inline constexpr int kCrossDomain = -1;

struct Example {
  std::string id;
  std::string group_id;
  std::vector<double> features;
  int label = 0;
};

/// A labeled corpus of dense feature vectors. Trusted labels when it is the
/// clean corpus; transferred (noisy) labels when produced by flatten_web.
struct Dataset {
  std::string name;
  int num_classes = 0;
  int feature_dim = 0;
  std::vector<Example> examples;

  std::size_t size() const noexcept { return examples.size(); }
  bool empty() const noexcept { return examples.empty(); }

  /// Checks shared dimension, finite features, label range and unique ids.
  void validate() const;
};

/// Row-per-example feature matrix (N x D).
Eigen::MatrixXd feature_matrix(const Dataset& ds);
std::vector<int> labels_of(const Dataset& ds);
std::vector<std::size_t> class_counts(const Dataset& ds);

/// Items retrieved for one clean query. Members carry the query's label;
/// `true_labels_hidden` exists only for simulated bags and is never read by
/// any training path.
struct WebBag {
  std::string query_id;
  int transferred_label = 0;
  std::vector<Example> members;
  std::optional<std::vector<int>> true_labels_hidden;
};

struct WebCorpus {
  int num_classes = 0;
  int feature_dim = 0;
  std::vector<WebBag> bags;

  std::size_t member_count() const noexcept;
  void validate() const;
};

/// Parameters of the simulated crawl.
struct NoiseSpec {
  /// Row y: distribution of the true class of a member fetched for a class-y query.
  Eigen::MatrixXd cross_category_kernel;
  /// Probability that a member is an out-of-domain outlier.
  double cross_domain_rate = 0.0;
  int bag_size = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Isotropic Gaussian class-conditional generator for clean data.
struct ClassMixtureSpec {
  std::string name = "synthetic";
  int num_classes = 0;
  int feature_dim = 0;
  std::vector<std::vector<double>> means;
  double sigma = 1.0;
  std::vector<int> counts;
  int groups_per_class = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Outliers are drawn from N(centroid + mean_offset, scale^2 I), where
/// centroid is the mean of the class means.
struct BackgroundSpec {
  double mean_offset = 0.0;
  double scale = 1.0;
};

// ---- file ingestion ---------------------------------------------------------

/// Parses `id,group_id,label,f0,...,f{D-1}`. K is max label + 1 unless given.
Dataset parse_dataset_csv(std::istream& in, std::string name,
                          std::optional<int> num_classes = std::nullopt);
Dataset load_dataset(const std::filesystem::path& path,
                     std::optional<int> num_classes = std::nullopt);
/// Writes the same schema; features use 17 significant digits.
void write_dataset_csv(std::ostream& out, const Dataset& ds);
void save_dataset(const std::filesystem::path& path, const Dataset& ds);

std::string web_corpus_to_json(const WebCorpus& corpus);
WebCorpus web_corpus_from_json(std::string_view text);
void save_web_corpus(const std::filesystem::path& path, const WebCorpus& corpus);
WebCorpus load_web_corpus(const std::filesystem::path& path);

// ---- splitting and simulation ----------------------------------------------

/// Partitions whole groups: groups are shuffled with `seed` and moved to the
/// train side until it first holds >= train_fraction of the examples. At least
/// one group always remains on the test side.
std::pair<Dataset, Dataset> grouped_split(const Dataset& ds, double train_fraction,
                                          std::uint64_t seed);

/// Group ids are assigned round-robin over each class's examples ("g0",
/// "g1", ...), so a group spans every class with at least groups_per_class
/// examples.
Dataset synth_clean(const ClassMixtureSpec& spec);

/// One bag of noise.bag_size members per example of `clean_train`.
WebCorpus synth_web_corpus(const Dataset& clean_train, const ClassMixtureSpec& classes,
                           const NoiseSpec& noise, const BackgroundSpec& background);

/// Concatenates all bag members, labeled with their bag's transferred label.
/// Members are grouped by query id.
Dataset flatten_web(const WebCorpus& corpus);

/// Kernel with `diagonal` on the diagonal and the rest spread evenly.
Eigen::MatrixXd uniform_off_diagonal_kernel(int num_classes, double diagonal);

/// Class c sits at separation * e_{c mod D} (+ separation on the next axis
/// for c >= D so means stay distinct).
std::vector<std::vector<double>> axis_class_means(int num_classes, int feature_dim,
                                                  double separation);

}  // namespace wsl
