#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "wsl/error.hpp"

namespace wsl::cli {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void reject_unknown(const json& obj, std::initializer_list<std::string_view> known,
                    std::string_view section) {
  if (!obj.is_object()) throw ValidationError("config section '" + std::string(section) + "' must be an object");
  for (const auto& [key, _] : obj.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ValidationError("unknown config key '" + std::string(section) + "." + key + "'");
}

template <typename T>
void read_if(const json& obj, const char* key, T& target) {
  if (const auto it = obj.find(key); it != obj.end() && !it->is_null()) target = it->get<T>();
}

void read_train(const json& j, TrainConfig& t, std::string_view section) {
  reject_unknown(j,
                 {"learning_rate_init", "momentum", "lr_decay_factor", "lr_decay_every", "epochs",
                  "batch_size", "shuffle_seed", "dropout_keep_prob", "verbose"},
                 section);
  read_if(j, "learning_rate_init", t.learning_rate_init);
  read_if(j, "momentum", t.momentum);
  read_if(j, "lr_decay_factor", t.lr_decay_factor);
  read_if(j, "lr_decay_every", t.lr_decay_every);
  read_if(j, "epochs", t.epochs);
  read_if(j, "batch_size", t.batch_size);
  read_if(j, "shuffle_seed", t.shuffle_seed);
  read_if(j, "dropout_keep_prob", t.dropout_keep_prob);
  read_if(j, "verbose", t.verbose);
}

ordered_json write_train(const TrainConfig& t) {
  return ordered_json{{"learning_rate_init", t.learning_rate_init},
                      {"momentum", t.momentum},
                      {"lr_decay_factor", t.lr_decay_factor},
                      {"lr_decay_every", t.lr_decay_every},
                      {"epochs", t.epochs},
                      {"batch_size", t.batch_size},
                      {"shuffle_seed", t.shuffle_seed},
                      {"dropout_keep_prob", t.dropout_keep_prob},
                      {"verbose", t.verbose}};
}

void read_synthetic(const json& j, SyntheticDataConfig& s) {
  reject_unknown(j,
                 {"num_classes", "feature_dim", "means", "mean_separation", "sigma", "pool_counts",
                  "groups_per_class", "train_fraction", "kernel", "kernel_diagonal",
                  "cross_domain_rate", "bag_size", "background"},
                 "data.synthetic");
  read_if(j, "num_classes", s.num_classes);
  read_if(j, "feature_dim", s.feature_dim);
  read_if(j, "means", s.means);
  read_if(j, "mean_separation", s.mean_separation);
  read_if(j, "sigma", s.sigma);
  read_if(j, "pool_counts", s.pool_counts);
  read_if(j, "groups_per_class", s.groups_per_class);
  read_if(j, "train_fraction", s.train_fraction);
  read_if(j, "kernel", s.kernel);
  read_if(j, "kernel_diagonal", s.kernel_diagonal);
  read_if(j, "cross_domain_rate", s.cross_domain_rate);
  read_if(j, "bag_size", s.bag_size);
  if (const auto it = j.find("background"); it != j.end()) {
    reject_unknown(*it, {"mean_offset", "scale"}, "data.synthetic.background");
    read_if(*it, "mean_offset", s.background.mean_offset);
    read_if(*it, "scale", s.background.scale);
  }
}

}  // namespace

TrainConfig default_web_train_config() {
  TrainConfig t;
  t.epochs = 30;
  t.batch_size = 32;
  return t;
}

TrainConfig default_clean_train_config() {
  TrainConfig t;
  t.epochs = 60;
  t.batch_size = 16;
  return t;
}

ClassMixtureSpec SyntheticDataConfig::mixture(std::uint64_t seed) const {
  ClassMixtureSpec spec;
  spec.name = "pool";
  spec.num_classes = num_classes;
  spec.feature_dim = feature_dim;
  spec.means = means.empty() ? axis_class_means(num_classes, feature_dim, mean_separation) : means;
  spec.sigma = sigma;
  spec.counts = pool_counts;
  spec.groups_per_class = groups_per_class;
  spec.seed = seed;
  return spec;
}

NoiseSpec SyntheticDataConfig::noise(std::uint64_t seed) const {
  NoiseSpec n;
  if (kernel.empty()) {
    n.cross_category_kernel = uniform_off_diagonal_kernel(num_classes, kernel_diagonal);
  } else {
    const auto k = static_cast<Eigen::Index>(kernel.size());
    n.cross_category_kernel.resize(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      if (kernel[static_cast<std::size_t>(i)].size() != kernel.size())
        throw ValidationError("data.synthetic.kernel must be square");
      for (Eigen::Index j = 0; j < k; ++j)
        n.cross_category_kernel(i, j) = kernel[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  n.cross_domain_rate = cross_domain_rate;
  n.bag_size = bag_size;
  n.seed = seed;
  return n;
}

void RunConfig::validate() const {
  for (int h : hidden_sizes)
    if (h < 1) throw ValidationError("model.hidden_sizes entries must be positive");
  if (init_scale != kInitSqrt2OverFanIn)
    throw ValidationError("model.init_scale must be '" + std::string(kInitSqrt2OverFanIn) + "'");
  train_web.validate();
  train_clean.validate();
  if (seeds.empty()) throw ValidationError("seeds must be nonempty");
  if (arms.empty()) throw ValidationError("arms must be nonempty");
  if (data_source == "synthetic") {
    synthetic.mixture(0).validate();
    synthetic.noise(0).validate();
    if (!(synthetic.train_fraction > 0.0 && synthetic.train_fraction < 1.0))
      throw ValidationError("data.synthetic.train_fraction must lie in (0, 1)");
    if (!(synthetic.background.scale > 0.0))
      throw ValidationError("data.synthetic.background.scale must be > 0");
  } else if (data_source == "files") {
    for (const auto* p : {&files.clean_train, &files.clean_test, &files.web}) {
      if (p->empty()) throw ValidationError("data.files needs clean_train, clean_test and web");
      if (!std::ifstream(*p)) throw ValidationError("data file '" + *p + "' does not exist");
    }
  } else {
    throw ValidationError("data.source must be 'synthetic' or 'files'");
  }
}

RunConfig run_config_from_json(std::string_view text) {
  RunConfig cfg;
  try {
    const auto doc = json::parse(text);
    reject_unknown(doc,
                   {"model", "train_web", "train_clean", "loss", "data", "seeds", "arms",
                    "output_dir"},
                   "");
    if (const auto it = doc.find("model"); it != doc.end()) {
      reject_unknown(*it, {"hidden_sizes", "init_scale"}, "model");
      read_if(*it, "hidden_sizes", cfg.hidden_sizes);
      read_if(*it, "init_scale", cfg.init_scale);
    }
    if (const auto it = doc.find("train_web"); it != doc.end()) read_train(*it, cfg.train_web, "train_web");
    if (const auto it = doc.find("train_clean"); it != doc.end())
      read_train(*it, cfg.train_clean, "train_clean");
    if (const auto it = doc.find("loss"); it != doc.end()) {
      reject_unknown(*it, {"renormalize_modulated"}, "loss");
      read_if(*it, "renormalize_modulated", cfg.loss.renormalize_modulated);
    }
    if (const auto it = doc.find("data"); it != doc.end()) {
      reject_unknown(*it, {"source", "synthetic", "files"}, "data");
      read_if(*it, "source", cfg.data_source);
      if (const auto s = it->find("synthetic"); s != it->end()) read_synthetic(*s, cfg.synthetic);
      if (const auto f = it->find("files"); f != it->end()) {
        reject_unknown(*f, {"clean_train", "clean_test", "web"}, "data.files");
        read_if(*f, "clean_train", cfg.files.clean_train);
        read_if(*f, "clean_test", cfg.files.clean_test);
        read_if(*f, "web", cfg.files.web);
      }
    }
    read_if(doc, "seeds", cfg.seeds);
    if (const auto it = doc.find("arms"); it != doc.end()) {
      cfg.arms.clear();
      for (const auto& a : *it) cfg.arms.push_back(parse_arm(a.get<std::string>()));
    }
    read_if(doc, "output_dir", cfg.output_dir);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("run config: ") + e.what(), 0);
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return run_config_from_json(ss.str());
}

std::string run_config_to_json(const RunConfig& cfg) {
  const auto& s = cfg.synthetic;
  std::vector<std::string> arms;
  for (Arm a : cfg.arms) arms.emplace_back(to_string(a));
  const ordered_json doc{
      {"model", {{"hidden_sizes", cfg.hidden_sizes}, {"init_scale", cfg.init_scale}}},
      {"train_web", write_train(cfg.train_web)},
      {"train_clean", write_train(cfg.train_clean)},
      {"loss", {{"renormalize_modulated", cfg.loss.renormalize_modulated}}},
      {"data",
       {{"source", cfg.data_source},
        {"synthetic",
         {{"num_classes", s.num_classes},
          {"feature_dim", s.feature_dim},
          {"means", s.means},
          {"mean_separation", s.mean_separation},
          {"sigma", s.sigma},
          {"pool_counts", s.pool_counts},
          {"groups_per_class", s.groups_per_class},
          {"train_fraction", s.train_fraction},
          {"kernel", s.kernel},
          {"kernel_diagonal", s.kernel_diagonal},
          {"cross_domain_rate", s.cross_domain_rate},
          {"bag_size", s.bag_size},
          {"background", {{"mean_offset", s.background.mean_offset}, {"scale", s.background.scale}}}}},
        {"files",
         {{"clean_train", cfg.files.clean_train},
          {"clean_test", cfg.files.clean_test},
          {"web", cfg.files.web}}}}},
      {"seeds", cfg.seeds},
      {"arms", arms},
      {"output_dir", cfg.output_dir}};
  return doc.dump(2) + "\n";
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  std::vector<std::uint64_t> seeds;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(',', start), text.size());
    const auto token = text.substr(start, end - start);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size())
      throw ValidationError("invalid seed '" + std::string(token) + "' in --seed list");
    seeds.push_back(v);
    start = end + 1;
  }
  return seeds;
}

}  // namespace wsl::cli
