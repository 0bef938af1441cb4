#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wsl/data.hpp"
#include "wsl/model.hpp"

namespace wsl {

/// Rows are true classes, columns predicted classes.
using ConfusionMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> predicted,
                                 int num_classes);

/// trace / total.
double accuracy(const ConfusionMatrix& confusion);
/// Mean per-class recall over classes present in the truth.
double macro_recall(const ConfusionMatrix& confusion);
double cohens_kappa(const ConfusionMatrix& confusion);

/// An AUC value, or the reason it is undefined.
struct Auc {
  std::optional<double> value;
  std::string absent_reason;

  bool defined() const noexcept { return value.has_value(); }
};

/// Mann-Whitney rank statistic with mid-ranks for ties.
Auc roc_auc_one_vs_rest(std::span<const double> scores, const std::vector<bool>& is_positive);

/// Row argmax; ties resolve to the lowest class index.
std::vector<int> argmax_rows(const Eigen::MatrixXd& posteriors);

struct EvalReport {
  std::string model_id;
  std::string dataset_id;
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  double macro_recall = 0.0;
  double kappa = 0.0;
  std::vector<Auc> auc_per_class;
  double auc_mean = 0.0;
  std::vector<std::int64_t> per_class_counts;
  std::vector<std::string> notes;
};

EvalReport evaluate_posteriors(const Eigen::MatrixXd& posteriors, std::span<const int> labels,
                               int num_classes);
EvalReport evaluate(const ModelParams& model, const Dataset& ds, std::string model_id = {},
                    std::string dataset_id = {});

/// `eval.json`. `timestamp` is written as null when absent.
std::string eval_report_json(const EvalReport& report,
                             const std::optional<std::string>& timestamp = std::nullopt);
/// `eval.csv`: one row per class.
std::string eval_report_csv(const EvalReport& report);

}  // namespace wsl
