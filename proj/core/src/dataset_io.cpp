#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>

#include <json.hpp>

#include "wsl/data.hpp"
#include "wsl/error.hpp"
#include "io_util.hpp"

namespace wsl {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view s, std::size_t line) {
  s = trim(s);
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || s.empty())
    throw ParseError("non-numeric feature '" + std::string(s) + "'", line);
  return v;
}

int parse_label(std::string_view s, std::size_t line) {
  s = trim(s);
  long long v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || s.empty())
    throw ParseError("label '" + std::string(s) + "' is not a base-10 integer", line);
  if (v < 0) throw ParseError("negative label " + std::to_string(v), line);
  if (v > 1'000'000) throw ParseError("label " + std::to_string(v) + " is implausibly large", line);
  return static_cast<int>(v);
}

void append_double(std::string& out, double v) {
  char buf[40];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  out.append(buf, ptr);
}

}  // namespace

Dataset parse_dataset_csv(std::istream& in, std::string name, std::optional<int> num_classes) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  ++line_no;
  const auto header = split_commas(trim(line));
  if (header.size() < 4 || trim(header[0]) != "id" || trim(header[1]) != "group_id" ||
      trim(header[2]) != "label")
    throw ParseError("header must be id,group_id,label,f0,...", line_no);
  const int dim = static_cast<int>(header.size()) - 3;

  Dataset ds;
  ds.name = std::move(name);
  ds.feature_dim = dim;
  int max_label = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto row_text = trim(line);
    if (row_text.empty()) continue;
    const auto cols = split_commas(row_text);
    if (cols.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " columns, found " +
                           std::to_string(cols.size()),
                       line_no);
    Example ex;
    ex.id = std::string(trim(cols[0]));
    ex.group_id = std::string(trim(cols[1]));
    if (ex.id.empty()) throw ParseError("empty id", line_no);
    ex.label = parse_label(cols[2], line_no);
    ex.features.reserve(static_cast<std::size_t>(dim));
    for (int d = 0; d < dim; ++d) ex.features.push_back(parse_double(cols[3 + d], line_no));
    max_label = std::max(max_label, ex.label);
    ds.examples.push_back(std::move(ex));
  }
  if (ds.examples.empty()) throw ParseError("no examples", 0);

  ds.num_classes = num_classes.value_or(max_label + 1);
  if (max_label >= ds.num_classes)
    throw ValidationError("label " + std::to_string(max_label) + " exceeds num_classes " +
                          std::to_string(ds.num_classes));
  ds.validate();
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path, std::optional<int> num_classes) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return parse_dataset_csv(in, path.stem().string(), num_classes);
}

void write_dataset_csv(std::ostream& out, const Dataset& ds) {
  std::string buf = "id,group_id,label";
  for (int d = 0; d < ds.feature_dim; ++d) buf += ",f" + std::to_string(d);
  buf += '\n';
  for (const auto& ex : ds.examples) {
    if (ex.id.find(',') != std::string::npos || ex.group_id.find(',') != std::string::npos)
      throw ValidationError("ids may not contain commas: '" + ex.id + "'");
    buf += ex.id;
    buf += ',';
    buf += ex.group_id;
    buf += ',';
    buf += std::to_string(ex.label);
    for (double v : ex.features) {
      buf += ',';
      append_double(buf, v);
    }
    buf += '\n';
  }
  out << buf;
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
  std::ostringstream ss;
  write_dataset_csv(ss, ds);
  detail::write_file(path, ss.str());
}

std::string web_corpus_to_json(const WebCorpus& corpus) {
  ordered_json doc;
  doc["num_classes"] = corpus.num_classes;
  doc["feature_dim"] = corpus.feature_dim;
  auto& bags = doc["bags"] = ordered_json::array();
  for (const auto& bag : corpus.bags) {
    ordered_json b;
    b["query_id"] = bag.query_id;
    b["transferred_label"] = bag.transferred_label;
    auto& members = b["members"] = ordered_json::array();
    for (const auto& m : bag.members) members.push_back({{"id", m.id}, {"features", m.features}});
    if (bag.true_labels_hidden)
      b["true_labels_hidden"] = *bag.true_labels_hidden;
    else
      b["true_labels_hidden"] = nullptr;
    bags.push_back(std::move(b));
  }
  return doc.dump() + "\n";
}

WebCorpus web_corpus_from_json(std::string_view text) {
  WebCorpus corpus;
  try {
    const auto doc = nlohmann::json::parse(text);
    corpus.num_classes = doc.at("num_classes").get<int>();
    corpus.feature_dim = doc.at("feature_dim").get<int>();
    for (const auto& b : doc.at("bags")) {
      WebBag bag;
      bag.query_id = b.at("query_id").get<std::string>();
      bag.transferred_label = b.at("transferred_label").get<int>();
      for (const auto& m : b.at("members")) {
        Example ex;
        ex.id = m.at("id").get<std::string>();
        ex.group_id = bag.query_id;
        ex.label = bag.transferred_label;
        ex.features = m.at("features").get<std::vector<double>>();
        bag.members.push_back(std::move(ex));
      }
      if (const auto it = b.find("true_labels_hidden"); it != b.end() && !it->is_null())
        bag.true_labels_hidden = it->get<std::vector<int>>();
      corpus.bags.push_back(std::move(bag));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("web corpus JSON: ") + e.what(), 0);
  }
  corpus.validate();
  return corpus;
}

void save_web_corpus(const std::filesystem::path& path, const WebCorpus& corpus) {
  detail::write_file(path, web_corpus_to_json(corpus));
}

WebCorpus load_web_corpus(const std::filesystem::path& path) {
  return web_corpus_from_json(detail::read_file(path));
}

}  // namespace wsl
