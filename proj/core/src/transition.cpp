#include "wsl/transition.hpp"

#include <json.hpp>

#include "wsl/error.hpp"

namespace wsl {

TransitionMatrix TransitionMatrix::identity(int k) {
  return TransitionMatrix{Eigen::MatrixXd::Identity(k, k), {}};
}

std::string transition_to_json(const TransitionMatrix& t) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < t.entries.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(t.entries.cols()));
    for (Eigen::Index j = 0; j < t.entries.cols(); ++j) row[static_cast<std::size_t>(j)] = t.entries(i, j);
    rows.push_back(std::move(row));
  }
  const nlohmann::ordered_json doc{
      {"k", t.k()},
      {"rows", std::move(rows)},
      {"provenance",
       {{"oracle_id", t.provenance.oracle_id},
        {"corpus_id", t.provenance.corpus_id},
        {"representative_ids", t.provenance.representative_ids}}}};
  return doc.dump(2) + "\n";
}

TransitionMatrix transition_from_json(std::string_view text) {
  TransitionMatrix t;
  try {
    const auto doc = nlohmann::json::parse(text);
    const int k = doc.at("k").get<int>();
    const auto rows = doc.at("rows").get<std::vector<std::vector<double>>>();
    if (k < 1 || rows.size() != static_cast<std::size_t>(k))
      throw ValidationError("transition JSON: row count does not match k");
    t.entries.resize(k, k);
    for (int i = 0; i < k; ++i) {
      if (rows[static_cast<std::size_t>(i)].size() != static_cast<std::size_t>(k))
        throw ValidationError("transition JSON: row " + std::to_string(i) + " has wrong length");
      for (int j = 0; j < k; ++j) t.entries(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    if (const auto it = doc.find("provenance"); it != doc.end()) {
      t.provenance.oracle_id = it->value("oracle_id", "");
      t.provenance.corpus_id = it->value("corpus_id", "");
      t.provenance.representative_ids =
          it->value("representative_ids", std::vector<std::string>{});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("transition JSON: ") + e.what(), 0);
  }
  return t;
}

}  // namespace wsl
