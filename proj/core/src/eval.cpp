#include "wsl/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <json.hpp>

#include "wsl/error.hpp"

namespace wsl {

namespace {

std::int64_t total_of(const ConfusionMatrix& m) {
  if (m.rows() == 0 || m.rows() != m.cols()) throw ValidationError("confusion matrix must be square");
  const std::int64_t total = m.sum();
  if (total <= 0) throw ValidationError("empty confusion matrix");
  return total;
}

std::string shortest(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> predicted,
                                 int num_classes) {
  if (truth.size() != predicted.size())
    throw ValidationError("true and predicted label lists differ in length");
  if (num_classes < 1) throw ValidationError("num_classes must be >= 1");
  ConfusionMatrix m = ConfusionMatrix::Zero(num_classes, num_classes);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i];
    const int p = predicted[i];
    if (t < 0 || t >= num_classes || p < 0 || p >= num_classes)
      throw ValidationError("label out of range at position " + std::to_string(i));
    ++m(t, p);
  }
  return m;
}

double accuracy(const ConfusionMatrix& confusion) {
  const auto total = total_of(confusion);
  return static_cast<double>(confusion.trace()) / static_cast<double>(total);
}

double macro_recall(const ConfusionMatrix& confusion) {
  total_of(confusion);
  double sum = 0.0;
  int present = 0;
  for (Eigen::Index c = 0; c < confusion.rows(); ++c) {
    const std::int64_t support = confusion.row(c).sum();
    if (support == 0) continue;
    sum += static_cast<double>(confusion(c, c)) / static_cast<double>(support);
    ++present;
  }
  return sum / present;
}

double cohens_kappa(const ConfusionMatrix& confusion) {
  const auto total = total_of(confusion);
  // Chance agreement numerator kept in integers so p_e == 1 is detected exactly.
  std::int64_t chance = 0;
  for (Eigen::Index c = 0; c < confusion.rows(); ++c)
    chance += confusion.row(c).sum() * confusion.col(c).sum();
  const std::int64_t total_sq = total * total;
  const std::int64_t trace = confusion.trace();
  if (chance == total_sq) return trace == total ? 1.0 : 0.0;
  const double p_o = static_cast<double>(trace) / static_cast<double>(total);
  const double p_e = static_cast<double>(chance) / static_cast<double>(total_sq);
  return (p_o - p_e) / (1.0 - p_e);
}

Auc roc_auc_one_vs_rest(std::span<const double> scores, const std::vector<bool>& is_positive) {
  if (scores.size() != is_positive.size())
    throw ValidationError("scores and labels differ in length");
  for (double s : scores)
    if (std::isnan(s)) throw ValidationError("NaN score passed to AUC");
  const std::size_t n = scores.size();
  const auto n_pos = static_cast<std::size_t>(std::count(is_positive.begin(), is_positive.end(), true));
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    return Auc{std::nullopt, "AUC undefined: " + std::to_string(n_pos) + " positives and " +
                                 std::to_string(n_neg) + " negatives"};

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double positive_rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t t = i; t <= j; ++t)
      if (is_positive[order[t]]) positive_rank_sum += mid_rank;
    i = j + 1;
  }
  const double np = static_cast<double>(n_pos);
  const double u = positive_rank_sum - np * (np + 1.0) / 2.0;
  return Auc{u / (np * static_cast<double>(n_neg)), {}};
}

std::vector<int> argmax_rows(const Eigen::MatrixXd& posteriors) {
  std::vector<int> out(static_cast<std::size_t>(posteriors.rows()));
  for (Eigen::Index i = 0; i < posteriors.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < posteriors.cols(); ++j)
      if (posteriors(i, j) > posteriors(i, best)) best = j;
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

EvalReport evaluate_posteriors(const Eigen::MatrixXd& posteriors, std::span<const int> labels,
                               int num_classes) {
  if (posteriors.rows() == 0) throw ValidationError("nothing to evaluate");
  if (static_cast<std::size_t>(posteriors.rows()) != labels.size() || posteriors.cols() != num_classes)
    throw ValidationError("posteriors do not match labels or K");

  EvalReport r;
  const auto predicted = argmax_rows(posteriors);
  r.confusion = confusion_matrix(labels, predicted, num_classes);
  r.accuracy = accuracy(r.confusion);
  r.macro_recall = macro_recall(r.confusion);
  r.kappa = cohens_kappa(r.confusion);
  r.per_class_counts.resize(static_cast<std::size_t>(num_classes));
  for (int c = 0; c < num_classes; ++c) r.per_class_counts[static_cast<std::size_t>(c)] = r.confusion.row(c).sum();

  std::vector<double> column(labels.size());
  std::vector<bool> positive(labels.size());
  double auc_sum = 0.0;
  int defined = 0;
  for (int c = 0; c < num_classes; ++c) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      column[i] = posteriors(static_cast<Eigen::Index>(i), c);
      positive[i] = labels[i] == c;
    }
    Auc auc = roc_auc_one_vs_rest(column, positive);
    if (auc.defined()) {
      auc_sum += *auc.value;
      ++defined;
    } else {
      r.notes.push_back("class " + std::to_string(c) + ": " + auc.absent_reason +
                        "; excluded from auc_mean");
    }
    r.auc_per_class.push_back(std::move(auc));
  }
  r.auc_mean = defined ? auc_sum / defined : std::numeric_limits<double>::quiet_NaN();
  return r;
}

EvalReport evaluate(const ModelParams& model, const Dataset& ds, std::string model_id,
                    std::string dataset_id) {
  if (ds.empty()) throw ValidationError("dataset '" + ds.name + "' is empty");
  if (ds.num_classes > model.config.num_classes)
    throw ValidationError("dataset has more classes than the model");
  const auto labels = labels_of(ds);
  EvalReport r = evaluate_posteriors(predict(model, ds), labels, model.config.num_classes);
  r.model_id = std::move(model_id);
  r.dataset_id = dataset_id.empty() ? ds.name : std::move(dataset_id);
  return r;
}

std::string eval_report_json(const EvalReport& report, const std::optional<std::string>& timestamp) {
  nlohmann::ordered_json confusion = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < report.confusion.rows(); ++i) {
    std::vector<std::int64_t> row(static_cast<std::size_t>(report.confusion.cols()));
    for (Eigen::Index j = 0; j < report.confusion.cols(); ++j) row[static_cast<std::size_t>(j)] = report.confusion(i, j);
    confusion.push_back(std::move(row));
  }
  nlohmann::ordered_json aucs = nlohmann::ordered_json::array();
  for (const auto& a : report.auc_per_class) {
    if (a.defined())
      aucs.push_back(*a.value);
    else
      aucs.push_back(nullptr);
  }
  nlohmann::ordered_json doc;
  doc["dataset"] = report.dataset_id;
  doc["model"] = report.model_id;
  doc["confusion"] = std::move(confusion);
  doc["accuracy"] = report.accuracy;
  doc["macro_recall"] = report.macro_recall;
  doc["kappa"] = report.kappa;
  doc["auc_per_class"] = std::move(aucs);
  if (std::isnan(report.auc_mean))
    doc["auc_mean"] = nullptr;
  else
    doc["auc_mean"] = report.auc_mean;
  doc["per_class_counts"] = report.per_class_counts;
  doc["notes"] = report.notes;
  if (timestamp)
    doc["timestamp"] = *timestamp;
  else
    doc["timestamp"] = nullptr;
  return doc.dump(2) + "\n";
}

std::string eval_report_csv(const EvalReport& report) {
  std::string out = "class,support,predicted,correct,recall,auc\n";
  for (Eigen::Index c = 0; c < report.confusion.rows(); ++c) {
    const std::int64_t support = report.confusion.row(c).sum();
    const std::int64_t predicted = report.confusion.col(c).sum();
    const std::int64_t correct = report.confusion(c, c);
    out += std::to_string(c) + ',' + std::to_string(support) + ',' + std::to_string(predicted) +
           ',' + std::to_string(correct) + ',';
    if (support > 0) out += shortest(static_cast<double>(correct) / static_cast<double>(support));
    out += ',';
    const auto& auc = report.auc_per_class[static_cast<std::size_t>(c)];
    if (auc.defined()) out += shortest(*auc.value);
    out += '\n';
  }
  return out;
}

}  // namespace wsl
