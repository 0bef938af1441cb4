#include "wsl/noise.hpp"

#include <cmath>
#include <sstream>

#include "wsl/error.hpp"

namespace wsl {

std::vector<Representative> mine_representatives(const Eigen::MatrixXd& posteriors,
                                                 const std::vector<std::string>& ids) {
  if (posteriors.rows() == 0) throw ValidationError("no web members to mine");
  if (static_cast<std::size_t>(posteriors.rows()) != ids.size())
    throw ValidationError("posterior rows and member ids disagree");
  std::vector<Representative> reps;
  reps.reserve(static_cast<std::size_t>(posteriors.cols()));
  for (Eigen::Index c = 0; c < posteriors.cols(); ++c) {
    Eigen::Index best = 0;
    // Strict comparison keeps the earliest index on ties.
    for (Eigen::Index i = 1; i < posteriors.rows(); ++i)
      if (posteriors(i, c) > posteriors(best, c)) best = i;
    reps.push_back(Representative{static_cast<int>(c), ids[static_cast<std::size_t>(best)],
                                  static_cast<std::size_t>(best),
                                  posteriors.row(best).transpose()});
  }
  return reps;
}

std::vector<Representative> mine_representatives(const ModelParams& oracle,
                                                 const WebCorpus& corpus) {
  if (oracle.config.num_classes != corpus.num_classes)
    throw ValidationError("oracle K=" + std::to_string(oracle.config.num_classes) +
                          " does not match corpus K=" + std::to_string(corpus.num_classes));
  const Dataset flat = flatten_web(corpus);
  std::vector<std::string> ids;
  ids.reserve(flat.size());
  for (const auto& ex : flat.examples) ids.push_back(ex.id);
  return mine_representatives(predict(oracle, flat), ids);
}

TransitionMatrix estimate_transition(const ModelParams& oracle, const WebCorpus& corpus,
                                     TransitionProvenance ids) {
  const auto reps = mine_representatives(oracle, corpus);
  const auto k = static_cast<Eigen::Index>(reps.size());
  TransitionMatrix t;
  t.entries.resize(k, k);
  ids.representative_ids.clear();
  for (const auto& r : reps) {
    t.entries.row(r.class_index) = r.posterior.transpose();
    ids.representative_ids.push_back(r.example_id);
  }
  t.provenance = std::move(ids);
  return t;
}

TransitionDiagnostics validate_transition(const TransitionMatrix& t) {
  TransitionDiagnostics d;
  d.matrix = t.entries;
  const auto k = t.entries.rows();
  d.row_sums = t.entries.rowwise().sum();
  d.row_stochastic = k > 0 && t.entries.cols() == k;
  d.all_rows_dominant = d.row_stochastic;
  for (Eigen::Index i = 0; i < k; ++i) {
    bool dominant = true;
    for (Eigen::Index j = 0; j < t.entries.cols(); ++j) {
      const double v = t.entries(i, j);
      if (!(v >= 0.0 && v <= 1.0)) d.row_stochastic = false;
      if (j != i && !(t.entries(i, i) > v)) dominant = false;
    }
    if (std::abs(d.row_sums(i) - 1.0) > 1e-9) d.row_stochastic = false;
    d.diagonally_dominant.push_back(dominant);
    d.all_rows_dominant = d.all_rows_dominant && dominant;
  }
  return d;
}

std::string TransitionDiagnostics::to_string() const {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed;
  out << "row  sum       dominant  entries\n";
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    out << i << "    " << row_sums(i) << "  " << (diagonally_dominant[static_cast<std::size_t>(i)] ? "yes" : "no ")
        << "      ";
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) out << (j ? " " : "") << matrix(i, j);
    out << '\n';
  }
  out << "row-stochastic: " << (row_stochastic ? "yes" : "no")
      << ", all rows diagonally dominant: " << (all_rows_dominant ? "yes" : "no") << '\n';
  return out.str();
}

}  // namespace wsl
