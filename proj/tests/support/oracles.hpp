#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace wsl::test {

/// Fraction of positive/negative pairs ranked correctly, ties worth one half.
inline double brute_force_auc(std::span<const double> scores, const std::vector<bool>& positive) {
  double won = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!positive[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (positive[j]) continue;
      ++pairs;
      if (scores[i] > scores[j])
        won += 1.0;
      else if (scores[i] == scores[j])
        won += 0.5;
    }
  }
  return won / static_cast<double>(pairs);
}

}  // namespace wsl::test
