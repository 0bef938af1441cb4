#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <memory>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "wsl/error.hpp"
#include "wsl/hash.hpp"
#include "wsl/model.hpp"
#include "wsl/noise.hpp"
#include "wsl/rng.hpp"

#ifndef WSL_VERSION
#define WSL_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;

namespace wsl::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

// Stream ids for derive_seed; changing them changes every run.
enum SeedStream : std::uint64_t {
  kPoolStream = 1,
  kSplitStream = 2,
  kCrawlStream = 3,
  kInitStream = 4,
  kWebShuffleStream = 5,
  kCleanShuffleStream = 6,
};

std::string fmt(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + p.string() + "'");
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

RunConfig resolve_config(const GlobalOptions& opts) {
  RunConfig cfg = opts.config_path ? load_run_config(*opts.config_path) : RunConfig{};
  if (opts.seeds) cfg.seeds = *opts.seeds;
  if (opts.out) cfg.output_dir = *opts.out;
  return cfg;
}

std::string dataset_csv_text(const Dataset& ds) {
  std::ostringstream ss;
  write_dataset_csv(ss, ds);
  return ss.str();
}

void print_class_table(std::ostream& out, const std::string& label, const Dataset& ds) {
  const auto counts = class_counts(ds);
  out << std::left << std::setw(12) << label << std::right << std::setw(7) << ds.size();
  for (std::size_t c = 0; c < counts.size(); ++c) {
    const double frac = ds.empty() ? 0.0 : static_cast<double>(counts[c]) / static_cast<double>(ds.size());
    out << "  " << std::setw(5) << counts[c] << " (" << std::fixed << std::setprecision(4) << frac
        << ")";
  }
  out << std::defaultfloat << '\n';
}

/// Loads the clean split and (lazily) the web corpus for one seed.
struct PreparedSeed {
  std::uint64_t seed = 0;
  std::shared_ptr<const Dataset> clean_train;
  std::shared_ptr<const Dataset> clean_test;
  std::function<WebCorpus()> web_loader;
  std::string clean_train_sha;
  std::string clean_test_sha;
  std::string web_sha;
};

struct CellContext {
  const RunConfig& cfg;
  const GlobalOptions& opts;
  fs::path out_dir;
  std::string config_sha;
};

ordered_json checkpoint_entry(const std::string& name, const fs::path& rel, const std::string& bytes) {
  return ordered_json{{"stage", name}, {"path", rel.generic_string()}, {"sha256", sha256_hex(bytes)}};
}

CellOutcome run_cell(const CellContext& ctx, Arm arm, const PreparedSeed& data) {
  CellOutcome outcome;
  outcome.arm = arm;
  outcome.seed = data.seed;
  const fs::path rel_cell = fs::path(std::string(to_string(arm))) / std::to_string(data.seed);
  const fs::path cell = ctx.out_dir / rel_cell;
  try {
    fs::create_directories(cell);
    fs::remove(cell / "eval.json");
    fs::remove(cell / "error.txt");

    const Dataset& train = *data.clean_train;
    const ModelConfig model_cfg =
        cell_model_config(ctx.cfg, train.feature_dim, train.num_classes, data.seed);
    const TrainConfig tw = cell_train_config(ctx.cfg.train_web, data.seed, true);
    const TrainConfig tc = cell_train_config(ctx.cfg.train_clean, data.seed, false);

    std::ostringstream verbose;
    WebCorpusSource web(data.web_loader);
    ArmOptions arm_opts;
    arm_opts.modulation = ctx.cfg.loss;
    arm_opts.verbose_out = &verbose;
    const ArmResult result = run_arm(arm, train, web, tw, tc, model_cfg, arm_opts);
    outcome.web_accesses = result.web_accesses_total;

    ordered_json checkpoints = ordered_json::array();
    const auto write_stage = [&](const std::string& name, const StageResult& stage) {
      fs::create_directories(cell / name);
      const std::string bytes = serialize_checkpoint(stage.params);
      write_text(cell / name / "checkpoint.wslckpt", bytes);
      write_text(cell / name / "log.jsonl", stage_log_jsonl(stage));
      checkpoints.push_back(checkpoint_entry(name, rel_cell / name / "checkpoint.wslckpt", bytes));
    };
    if (result.oracle) write_stage("oracle", *result.oracle);
    for (std::size_t i = 0; i < result.stages.size(); ++i)
      write_stage("stage" + std::to_string(i + 1), result.stages[i]);

    std::string transition_sha;
    if (result.transition) {
      TransitionMatrix t = *result.transition;
      t.provenance.oracle_id = checkpoints.front()["sha256"].get<std::string>();
      t.provenance.corpus_id = data.web_sha;
      const std::string text = transition_to_json(t);
      transition_sha = sha256_hex(text);
      write_text(cell / "transition.json", text);
    }
    if (!verbose.str().empty()) write_text(cell / "verbose.log", verbose.str());

    const std::string final_sha = checkpoints.back()["sha256"].get<std::string>();
    EvalReport report = evaluate(result.final_params, *data.clean_test, final_sha, data.clean_test->name);
    write_text(cell / "eval.csv", eval_report_csv(report));
    const std::optional<std::string> stamp =
        ctx.opts.stamp_time ? std::optional<std::string>(utc_now()) : std::nullopt;

    ordered_json provenance{
        {"code_version", code_version()},
        {"arm", std::string(to_string(arm))},
        {"seed", data.seed},
        {"config_sha256", ctx.config_sha},
        {"inputs",
         {{"clean_train_sha256", data.clean_train_sha},
          {"clean_test_sha256", data.clean_test_sha},
          {"web_sha256", data.web_sha}}},
        {"model_config",
         {{"input_dim", model_cfg.input_dim},
          {"hidden_sizes", model_cfg.hidden_sizes},
          {"num_classes", model_cfg.num_classes},
          {"init_seed", model_cfg.init_seed}}},
        {"shuffle_seeds", {{"web", tw.shuffle_seed}, {"clean", tc.shuffle_seed}}},
        {"checkpoints", checkpoints},
        {"transition_sha256", transition_sha.empty() ? ordered_json(nullptr) : ordered_json(transition_sha)},
        {"web_accesses_before_finetune", result.web_accesses_before_finetune},
        {"web_accesses_total", result.web_accesses_total}};
    write_text(cell / "provenance.json", provenance.dump(2) + "\n");
    // Written last: its presence marks the cell as complete.
    write_text(cell / "eval.json", eval_report_json(report, stamp));
    outcome.report = std::move(report);
    outcome.ok = true;
  } catch (const std::exception& e) {
    outcome.error = e.what();
    std::error_code ec;
    fs::create_directories(cell, ec);
    std::ofstream(cell / "error.txt") << e.what() << '\n';
  }
  return outcome;
}

std::vector<PreparedSeed> prepare_data(const RunConfig& cfg, const fs::path& out_dir) {
  std::vector<PreparedSeed> prepared;
  if (cfg.data_source == "files") {
    const std::string train_bytes = read_text(cfg.files.clean_train);
    const std::string test_bytes = read_text(cfg.files.clean_test);
    const std::string web_bytes = read_text(cfg.files.web);
    auto train = std::make_shared<const Dataset>(load_dataset(cfg.files.clean_train));
    auto test = std::make_shared<const Dataset>(load_dataset(cfg.files.clean_test, train->num_classes));
    if (test->feature_dim != train->feature_dim)
      throw ValidationError("clean_train and clean_test disagree on feature dimension");
    const std::string web_path = cfg.files.web;
    for (std::uint64_t seed : cfg.seeds) {
      PreparedSeed p;
      p.seed = seed;
      p.clean_train = train;
      p.clean_test = test;
      p.web_loader = [web_path] { return load_web_corpus(web_path); };
      p.clean_train_sha = sha256_hex(train_bytes);
      p.clean_test_sha = sha256_hex(test_bytes);
      p.web_sha = sha256_hex(web_bytes);
      prepared.push_back(std::move(p));
    }
    return prepared;
  }
  for (std::uint64_t seed : cfg.seeds) {
    SeedData data = make_synthetic_data(cfg.synthetic, seed);
    const fs::path dir = out_dir / "data" / std::to_string(seed);
    write_seed_data(dir, data);
    PreparedSeed p;
    p.seed = seed;
    p.clean_train_sha = sha256_hex(read_text(dir / "clean_train.csv"));
    p.clean_test_sha = sha256_hex(read_text(dir / "clean_test.csv"));
    p.web_sha = sha256_hex(read_text(dir / "web.json"));
    p.clean_train = std::make_shared<const Dataset>(std::move(data.clean_train));
    p.clean_test = std::make_shared<const Dataset>(std::move(data.clean_test));
    auto web = std::make_shared<const WebCorpus>(std::move(data.web));
    p.web_loader = [web] { return *web; };
    prepared.push_back(std::move(p));
  }
  return prepared;
}

struct ArmSummary {
  std::string arm;
  std::vector<double> accuracy, macro_recall, kappa, auc_mean;
  int failed = 0;
};

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {std::nan(""), std::nan("")};
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

std::string fmt_or_empty(double v) { return std::isnan(v) ? std::string() : fmt(v); }

std::vector<ArmSummary> collect(const fs::path& run_dir, const RunConfig& cfg, std::string* rows_csv) {
  std::vector<ArmSummary> arms;
  for (Arm arm : cfg.arms) {
    ArmSummary s;
    s.arm = std::string(to_string(arm));
    for (std::uint64_t seed : cfg.seeds) {
      const fs::path eval_path = run_dir / s.arm / std::to_string(seed) / "eval.json";
      std::string row = s.arm + ',' + std::to_string(seed) + ',';
      if (!fs::exists(eval_path)) {
        ++s.failed;
        row += "failed,,,,";
      } else {
        const auto doc = nlohmann::json::parse(read_text(eval_path));
        const double acc = doc.at("accuracy").get<double>();
        const double mr = doc.at("macro_recall").get<double>();
        const double kappa = doc.at("kappa").get<double>();
        const double auc = doc.at("auc_mean").is_null() ? std::nan("") : doc.at("auc_mean").get<double>();
        s.accuracy.push_back(acc);
        s.macro_recall.push_back(mr);
        s.kappa.push_back(kappa);
        if (!std::isnan(auc)) s.auc_mean.push_back(auc);
        row += "ok," + fmt(acc) + ',' + fmt(mr) + ',' + fmt(kappa) + ',' + fmt_or_empty(auc);
      }
      if (rows_csv) *rows_csv += row + '\n';
    }
    arms.push_back(std::move(s));
  }
  return arms;
}

void print_arm_table(std::ostream& out, const std::vector<ArmSummary>& arms) {
  out << std::left << std::setw(10) << "arm" << std::right << std::setw(5) << "ok" << std::setw(18)
      << "accuracy" << std::setw(18) << "kappa" << std::setw(18) << "auc_mean" << '\n';
  for (const auto& a : arms) {
    const auto [am, as] = mean_std(a.accuracy);
    const auto [km, ks] = mean_std(a.kappa);
    const auto [um, us] = mean_std(a.auc_mean);
    out << std::left << std::setw(10) << a.arm << std::right << std::setw(5) << a.accuracy.size()
        << std::fixed << std::setprecision(4) << std::setw(10) << am << " +- " << std::setw(4) << as
        << std::setw(10) << km << " +- " << std::setw(4) << ks << std::setw(10) << um << " +- "
        << std::setw(4) << us << std::defaultfloat << '\n';
  }
}

int report_error(std::ostream& err, const std::exception& e) {
  err << "error: " << e.what() << '\n';
  return dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const ParseError*>(&e)
             ? kExitUsage
             : kExitFailure;
}

}  // namespace

std::string code_version() { return std::string("wsl ") + WSL_VERSION; }

bool RunOutcome::all_ok() const {
  return std::all_of(cells.begin(), cells.end(), [](const CellOutcome& c) { return c.ok; });
}

SeedData make_synthetic_data(const SyntheticDataConfig& cfg, std::uint64_t seed) {
  const ClassMixtureSpec mixture = cfg.mixture(derive_seed(seed, {kPoolStream}));
  const Dataset pool = synth_clean(mixture);
  auto [train, test] = grouped_split(pool, cfg.train_fraction, derive_seed(seed, {kSplitStream}));
  train.name = "clean_train";
  test.name = "clean_test";
  WebCorpus web =
      synth_web_corpus(train, mixture, cfg.noise(derive_seed(seed, {kCrawlStream})), cfg.background);
  return SeedData{std::move(train), std::move(test), std::move(web)};
}

void write_seed_data(const fs::path& dir, const SeedData& data) {
  fs::create_directories(dir);
  write_text(dir / "clean_train.csv", dataset_csv_text(data.clean_train));
  write_text(dir / "clean_test.csv", dataset_csv_text(data.clean_test));
  write_text(dir / "web.json", web_corpus_to_json(data.web));
}

ModelConfig cell_model_config(const RunConfig& cfg, int input_dim, int num_classes,
                              std::uint64_t seed) {
  ModelConfig m;
  m.input_dim = input_dim;
  m.hidden_sizes = cfg.hidden_sizes;
  m.num_classes = num_classes;
  m.dropout_keep_prob = cfg.train_clean.dropout_keep_prob;
  m.init_seed = derive_seed(seed, {kInitStream});
  m.init_scale = cfg.init_scale;
  return m;
}

TrainConfig cell_train_config(const TrainConfig& base, std::uint64_t seed, bool web_stage) {
  TrainConfig t = base;
  t.shuffle_seed =
      derive_seed(seed, {web_stage ? kWebShuffleStream : kCleanShuffleStream, base.shuffle_seed});
  return t;
}

void write_summaries(const fs::path& run_dir, const RunConfig& cfg) {
  std::string rows = "arm,seed,status,accuracy,macro_recall,kappa,auc_mean\n";
  const auto arms = collect(run_dir, cfg, &rows);
  write_text(run_dir / "summary.csv", rows);

  std::string by_arm =
      "arm,n_ok,n_failed,accuracy_mean,accuracy_std,macro_recall_mean,macro_recall_std,kappa_mean,"
      "kappa_std,auc_mean_mean,auc_mean_std\n";
  for (const auto& a : arms) {
    by_arm += a.arm + ',' + std::to_string(a.accuracy.size()) + ',' + std::to_string(a.failed);
    for (const auto* v : {&a.accuracy, &a.macro_recall, &a.kappa, &a.auc_mean}) {
      const auto [m, s] = mean_std(*v);
      by_arm += ',' + fmt_or_empty(m) + ',' + fmt_or_empty(s);
    }
    by_arm += '\n';
  }
  write_text(run_dir / "summary_by_arm.csv", by_arm);
}

RunOutcome execute_run(const RunConfig& cfg, const GlobalOptions& opts, std::ostream& err) {
  cfg.validate();
  const fs::path out_dir = cfg.output_dir;
  if (fs::exists(out_dir / "effective_config.json") && !opts.overwrite)
    throw ValidationError("run directory '" + out_dir.string() +
                          "' already holds a run; pass --overwrite to replace it");
  fs::create_directories(out_dir);
  const std::string effective = run_config_to_json(cfg);
  write_text(out_dir / "effective_config.json", effective);

  const auto prepared = prepare_data(cfg, out_dir);
  const CellContext ctx{cfg, opts, out_dir, sha256_hex(effective)};

  struct Job {
    Arm arm;
    const PreparedSeed* data;
  };
  std::vector<Job> jobs;
  for (Arm arm : cfg.arms)
    for (const auto& p : prepared) jobs.push_back({arm, &p});

  RunOutcome outcome;
  outcome.cells.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++)
      outcome.cells[i] = run_cell(ctx, jobs[i].arm, *jobs[i].data);
  };
  const int n_threads = std::max(1, std::min<int>(opts.jobs, static_cast<int>(jobs.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  for (const auto& c : outcome.cells)
    if (!c.ok)
      err << "cell " << to_string(c.arm) << "/" << c.seed << " failed: " << c.error << '\n';
  write_summaries(out_dir, cfg);
  return outcome;
}

int cmd_synth(const GlobalOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = resolve_config(opts);
    if (cfg.data_source != "synthetic")
      throw ValidationError("synth needs data.source = synthetic");
    cfg.synthetic.mixture(0).validate();
    cfg.synthetic.noise(0).validate();
    const fs::path base = cfg.output_dir;
    for (std::uint64_t seed : cfg.seeds) {
      const fs::path dir = cfg.seeds.size() == 1 ? base : base / ("seed_" + std::to_string(seed));
      if (fs::exists(dir / "clean_train.csv") && !opts.overwrite)
        throw ValidationError("'" + dir.string() + "' already holds data; pass --overwrite");
      const SeedData data = make_synthetic_data(cfg.synthetic, seed);
      write_seed_data(dir, data);

      const Dataset web_flat = flatten_web(data.web);
      std::size_t cross_domain = 0;
      for (const auto& bag : data.web.bags)
        if (bag.true_labels_hidden)
          cross_domain += static_cast<std::size_t>(
              std::count(bag.true_labels_hidden->begin(), bag.true_labels_hidden->end(), kCrossDomain));
      out << "seed " << seed << " -> " << dir.string() << '\n';
      out << std::left << std::setw(12) << "split" << std::right << std::setw(7) << "n";
      for (int c = 0; c < data.clean_train.num_classes; ++c)
        out << "  " << std::setw(14) << ("class " + std::to_string(c));
      out << '\n';
      print_class_table(out, "clean_train", data.clean_train);
      print_class_table(out, "clean_test", data.clean_test);
      print_class_table(out, "web", web_flat);
      out << "web bags " << data.web.bags.size() << ", members " << data.web.member_count()
          << ", cross-domain " << cross_domain << '\n';
    }
    return kExitOk;
  } catch (const std::exception& e) {
    return report_error(err, e);
  }
}

int cmd_run(const GlobalOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = resolve_config(opts);
    const RunOutcome outcome = execute_run(cfg, opts, err);
    for (const auto& c : outcome.cells) {
      out << std::left << std::setw(10) << to_string(c.arm) << std::right << std::setw(6) << c.seed;
      if (c.ok)
        out << "  accuracy " << std::fixed << std::setprecision(4) << c.report->accuracy << "  kappa "
            << c.report->kappa << std::defaultfloat << '\n';
      else
        out << "  FAILED\n";
    }
    print_arm_table(out, collect(cfg.output_dir, cfg, nullptr));
    return outcome.all_ok() ? kExitOk : kExitFailure;
  } catch (const std::exception& e) {
    return report_error(err, e);
  }
}

int cmd_eval(const GlobalOptions& opts, const EvalArgs& args, std::ostream& out, std::ostream& err) {
  try {
    if (args.checkpoint.empty() || !fs::exists(args.checkpoint))
      throw Error("checkpoint '" + args.checkpoint + "' not found");
    if (args.data.empty() || !fs::exists(args.data))
      throw Error("dataset '" + args.data + "' not found");
    const std::string ckpt_bytes = read_text(args.checkpoint);
    const ModelParams params = deserialize_checkpoint(ckpt_bytes);
    const Dataset ds = load_dataset(args.data, params.config.num_classes);
    if (ds.feature_dim != params.config.input_dim)
      throw ValidationError("dataset has D=" + std::to_string(ds.feature_dim) + " but checkpoint expects D=" +
                            std::to_string(params.config.input_dim));
    const EvalReport report = evaluate(params, ds, sha256_hex(ckpt_bytes), ds.name);
    Dataset features;
    if (args.export_features) {
      const Eigen::MatrixXd feats = penultimate_features(params, ds);
      features.name = ds.name + "_features";
      features.num_classes = ds.num_classes;
      features.feature_dim = static_cast<int>(feats.cols());
      for (std::size_t i = 0; i < ds.size(); ++i) {
        Example ex{ds.examples[i].id, ds.examples[i].group_id, {}, ds.examples[i].label};
        for (Eigen::Index j = 0; j < feats.cols(); ++j)
          ex.features.push_back(feats(static_cast<Eigen::Index>(i), j));
        features.examples.push_back(std::move(ex));
      }
    }

    const fs::path dir = opts.out.value_or(".");
    fs::create_directories(dir);
    const std::optional<std::string> stamp =
        opts.stamp_time ? std::optional<std::string>(utc_now()) : std::nullopt;
    write_text(dir / "eval.json", eval_report_json(report, stamp));
    write_text(dir / "eval.csv", eval_report_csv(report));
    if (args.export_features) write_text(dir / "features.csv", dataset_csv_text(features));

    out << "examples " << ds.size() << "  accuracy " << fmt(report.accuracy) << "  macro_recall "
        << fmt(report.macro_recall) << "  kappa " << fmt(report.kappa) << "  auc_mean "
        << fmt_or_empty(report.auc_mean) << '\n';
    for (const auto& note : report.notes) out << "note: " << note << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int cmd_estimate_noise(const GlobalOptions& opts, const EstimateNoiseArgs& args, std::ostream& out,
                       std::ostream& err) {
  try {
    if (args.checkpoint.empty() || !fs::exists(args.checkpoint))
      throw Error("checkpoint '" + args.checkpoint + "' not found");
    if (args.web.empty() || !fs::exists(args.web)) throw Error("web corpus '" + args.web + "' not found");
    const std::string ckpt_bytes = read_text(args.checkpoint);
    const std::string web_bytes = read_text(args.web);
    const ModelParams oracle = deserialize_checkpoint(ckpt_bytes);
    const WebCorpus corpus = web_corpus_from_json(web_bytes);
    const TransitionMatrix t = estimate_transition(
        oracle, corpus, TransitionProvenance{sha256_hex(ckpt_bytes), sha256_hex(web_bytes), {}});

    const fs::path dir = opts.out.value_or(".");
    fs::create_directories(dir);
    write_text(dir / "transition.json", transition_to_json(t));
    out << validate_transition(t).to_string();
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int cmd_report(const GlobalOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    fs::path dir;
    if (opts.out)
      dir = *opts.out;
    else if (opts.config_path)
      dir = load_run_config(*opts.config_path).output_dir;
    else
      throw ValidationError("report needs --out <run dir>");
    RunConfig cfg = load_run_config((dir / "effective_config.json").string());
    if (opts.seeds) cfg.seeds = *opts.seeds;
    write_summaries(dir, cfg);
    const auto arms = collect(dir, cfg, nullptr);
    print_arm_table(out, arms);
    const bool any_failed =
        std::any_of(arms.begin(), arms.end(), [](const ArmSummary& a) { return a.failed > 0; });
    return any_failed ? kExitFailure : kExitOk;
  } catch (const std::exception& e) {
    return report_error(err, e);
  }
}

}  // namespace wsl::cli
