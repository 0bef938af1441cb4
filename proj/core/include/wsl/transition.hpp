#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace wsl {

struct TransitionProvenance {
  std::string oracle_id;
  std::string corpus_id;
  /// Representative web member id for each class, in class order.
  std::vector<std::string> representative_ids;
};

/// K x K row-stochastic class-confusion estimate; entries(i, j) is the
/// probability that an item labeled i looks like class j.
struct TransitionMatrix {
  Eigen::MatrixXd entries;
  TransitionProvenance provenance;

  int k() const noexcept { return static_cast<int>(entries.rows()); }
  static TransitionMatrix identity(int k);
};

/// `{k, rows, provenance}`; doubles are written in shortest round-trip form.
std::string transition_to_json(const TransitionMatrix& t);
TransitionMatrix transition_from_json(std::string_view text);

}  // namespace wsl
