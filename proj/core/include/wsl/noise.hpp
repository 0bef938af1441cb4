#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wsl/data.hpp"
#include "wsl/model.hpp"
#include "wsl/transition.hpp"

namespace wsl {

/// The web member that the oracle scores highest for one class.
struct Representative {
  int class_index = 0;
  std::string example_id;
  /// Position in flatten_web order.
  std::size_t flat_index = 0;
  Eigen::VectorXd posterior;
};

/// For every class c, the member maximizing p(c | x) over ALL members of the
/// corpus, whatever their transferred label. Ties go to the lowest flat index.
std::vector<Representative> mine_representatives(const ModelParams& oracle,
                                                  const WebCorpus& corpus);

/// Same selection over precomputed posteriors (one row per member).
std::vector<Representative> mine_representatives(const Eigen::MatrixXd& posteriors,
                                                 const std::vector<std::string>& ids);

/// Row i is the oracle's full posterior on the class-i representative.
/// `ids` supplies oracle/corpus identifiers for the provenance record.
TransitionMatrix estimate_transition(const ModelParams& oracle, const WebCorpus& corpus,
                                     TransitionProvenance ids = {});

struct TransitionDiagnostics {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd row_sums;
  /// Row i: t_ii strictly exceeds every off-diagonal entry of the row.
  std::vector<bool> diagonally_dominant;
  bool all_rows_dominant = false;
  /// Every row sums to 1 within 1e-9 and entries lie in [0, 1].
  bool row_stochastic = false;

  std::string to_string() const;
};

TransitionDiagnostics validate_transition(const TransitionMatrix& t);

}  // namespace wsl
