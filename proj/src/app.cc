// Copyright 2026 The typent Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "typent/app.h"

#include <chrono>
#include <cinttypes>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "typent/corpus.h"
#include "typent/errors.h"
#include "typent/evaluation.h"
#include "typent/external_scorer.h"
#include "typent/labelspace.h"
#include "typent/templates.h"
#include "typent/util.h"

namespace typent {

namespace fs = std::filesystem;
using nlohmann::json;

// Configuration.

namespace {

using Setter = std::function<void(RunConfig &, const json &)>;

struct KeySpec {
  Setter set;
  bool is_path = false;
};

std::vector<double> parse_grid(const json &v) {
  if (v.is_array()) return v.get<std::vector<double>>();
  if (v.is_string()) {
    // start:stop:step
    std::string s = v.get<std::string>();
    size_t a = s.find(':'), b = s.rfind(':');
    if (a == std::string::npos || a == b)
      throw ConfigError("grid must be an array or 'start:stop:step'");
    const double start = std::stod(s.substr(0, a));
    const double stop = std::stod(s.substr(a + 1, b - a - 1));
    const double step = std::stod(s.substr(b + 1));
    if (!(step > 0.0)) throw ConfigError("grid step must be positive");
    std::vector<double> grid;
    for (int i = 0;; ++i) {
      const double t = start + i * step;
      if (t > stop + 1e-9) break;
      grid.push_back(t);
    }
    return grid;
  }
  throw ConfigError("grid must be an array or 'start:stop:step'");
}

const std::map<std::string, KeySpec> &key_table() {
  static const std::map<std::string, KeySpec> kKeys = {
      {"dataset_name", {[](RunConfig &c, const json &v) { c.dataset_name = v.get<std::string>(); }}},
      {"train_path", {[](RunConfig &c, const json &v) { c.train_path = v.get<std::string>(); }, true}},
      {"dev_path", {[](RunConfig &c, const json &v) { c.dev_path = v.get<std::string>(); }, true}},
      {"test_path", {[](RunConfig &c, const json &v) { c.test_path = v.get<std::string>(); }, true}},
      {"vocab_path", {[](RunConfig &c, const json &v) { c.vocab_path = v.get<std::string>(); }, true}},
      {"tier_path", {[](RunConfig &c, const json &v) { c.tier_path = v.get<std::string>(); }, true}},
      {"split", {[](RunConfig &c, const json &v) { c.split = v.get<std::string>(); parse_split(c.split); }}},
      {"scorer", {[](RunConfig &c, const json &v) { c.scorer = v.get<std::string>(); }}},
      {"scorer_trainable", {[](RunConfig &c, const json &v) { c.scorer_trainable = v.get<bool>(); }}},
      {"scorer_timeout_ms", {[](RunConfig &c, const json &v) { c.scorer_timeout_ms = v.get<int64_t>(); }}},
      {"cache_path", {[](RunConfig &c, const json &v) { c.cache_path = v.get<std::string>(); }, true}},
      {"margin", {[](RunConfig &c, const json &v) { c.training.margin = v.get<double>(); }}},
      {"lambda", {[](RunConfig &c, const json &v) { c.training.dependency_weight = v.get<double>(); }}},
      {"negatives_per_positive", {[](RunConfig &c, const json &v) { c.training.negatives_per_positive = v.get<size_t>(); }}},
      {"batch_size", {[](RunConfig &c, const json &v) { c.training.batch_size = v.get<size_t>(); }}},
      {"max_epochs", {[](RunConfig &c, const json &v) { c.training.max_epochs = v.get<size_t>(); }}},
      {"eval_every", {[](RunConfig &c, const json &v) { c.training.eval_every = v.get<size_t>(); }}},
      {"template", {[](RunConfig &c, const json &v) {
         c.training.template_kind = c.prediction.template_kind =
             parse_template(v.get<std::string>());
       }}},
      {"learning_rate", {[](RunConfig &c, const json &v) { c.learning_rate = v.get<double>(); }}},
      {"hash_bits", {[](RunConfig &c, const json &v) { c.hash_bits = v.get<int>(); }}},
      {"threshold", {[](RunConfig &c, const json &v) { c.prediction.threshold = v.get<double>(); }}},
      {"fallback", {[](RunConfig &c, const json &v) { c.prediction.fallback = Fallback::parse(v.get<std::string>()); }}},
      {"threshold_path", {[](RunConfig &c, const json &v) { c.threshold_path = v.get<std::string>(); }, true}},
      {"topk", {[](RunConfig &c, const json &v) { c.topk = v.get<size_t>(); }}},
      {"grid", {[](RunConfig &c, const json &v) { c.grid = parse_grid(v); }}},
      {"objective", {[](RunConfig &c, const json &v) { c.objective = v.get<std::string>(); parse_objective(c.objective); }}},
      {"predictions_path", {[](RunConfig &c, const json &v) { c.predictions_path = v.get<std::string>(); }, true}},
      {"bucket_edges", {[](RunConfig &c, const json &v) { c.bucket_edges = v.get<std::vector<size_t>>(); }}},
      {"fewshot_fraction", {[](RunConfig &c, const json &v) { c.fewshot_fraction = v.get<double>(); }}},
      {"seed", {[](RunConfig &c, const json &v) { c.seed = c.training.seed = v.get<uint64_t>(); }}},
      {"out_dir", {[](RunConfig &c, const json &v) { c.out_dir = v.get<std::string>(); }, true}},
  };
  return kKeys;
}

std::string resolve_path(const std::string &value, const fs::path &base) {
  if (value.empty() || base.empty()) return value;
  fs::path p(value);
  if (p.is_absolute()) return value;
  return (base / p).lexically_normal().string();
}

// Resolves the PATH part of file-backed scorer specs.
std::string resolve_scorer(const std::string &spec, const fs::path &base) {
  for (const char *prefix : {"table:", "stub:", "lexical:"}) {
    const std::string p(prefix);
    if (spec.rfind(p, 0) == 0)
      return p + resolve_path(spec.substr(p.size()), base);
  }
  return spec;
}

void apply_key(RunConfig &config, const std::string &key, json value,
               const fs::path &base) {
  auto it = key_table().find(key);
  if (it == key_table().end())
    throw ConfigError("unknown configuration key '" + key + "'");
  if (it->second.is_path && value.is_string())
    value = resolve_path(value.get<std::string>(), base);
  if (key == "scorer" && value.is_string())
    value = resolve_scorer(value.get<std::string>(), base);
  try {
    it->second.set(config, value);
  } catch (const json::exception &e) {
    throw ConfigError("bad value for '" + key + "': " + value.dump());
  } catch (const std::invalid_argument &) {
    throw ConfigError("bad value for '" + key + "': " + value.dump());
  }
}

}  // namespace

json RunConfig::to_json() const {
  return json{{"dataset_name", dataset_name},
              {"train_path", train_path},
              {"dev_path", dev_path},
              {"test_path", test_path},
              {"vocab_path", vocab_path},
              {"tier_path", tier_path},
              {"split", split},
              {"scorer", scorer},
              {"scorer_trainable", scorer_trainable},
              {"scorer_timeout_ms", scorer_timeout_ms},
              {"cache_path", cache_path},
              {"margin", training.margin},
              {"lambda", training.dependency_weight},
              {"negatives_per_positive", training.negatives_per_positive},
              {"batch_size", training.batch_size},
              {"max_epochs", training.max_epochs},
              {"eval_every", training.eval_every},
              {"template", template_name(prediction.template_kind)},
              {"learning_rate", learning_rate},
              {"hash_bits", hash_bits},
              {"threshold", prediction.threshold},
              {"fallback", prediction.fallback.to_string()},
              {"threshold_path", threshold_path},
              {"topk", topk},
              {"grid", grid},
              {"objective", objective},
              {"predictions_path", predictions_path},
              {"bucket_edges", bucket_edges},
              {"fewshot_fraction", fewshot_fraction},
              {"seed", seed},
              {"out_dir", out_dir}};
}

RunConfig run_config_from_json(const json &doc, const fs::path &base_dir) {
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  RunConfig config;
  for (auto it = doc.begin(); it != doc.end(); ++it)
    apply_key(config, it.key(), it.value(), base_dir);
  return config;
}

RunConfig load_run_config(const fs::path &config_path,
                          const std::vector<std::string> &overrides) {
  RunConfig config;
  if (!config_path.empty()) {
    json doc;
    try {
      doc = json::parse(read_file(config_path));
    } catch (const json::parse_error &e) {
      throw ConfigError("cannot parse " + config_path.string() + ": " +
                        e.what());
    }
    fs::path base = fs::absolute(config_path).parent_path();
    config = run_config_from_json(doc, base);
  }
  for (const auto &kv : overrides) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    const std::string raw = kv.substr(eq + 1);
    json value = json::parse(raw, nullptr, /*allow_exceptions=*/false);
    if (value.is_discarded()) value = raw;
    apply_key(config, key, std::move(value), {});
  }
  return config;
}

// Scorers.

std::unique_ptr<EntailmentScorer> make_scorer(const RunConfig &config) {
  const std::string &spec = config.scorer;
  if (spec == "overlap") return std::make_unique<OverlapScorer>();
  if (spec.rfind("table:", 0) == 0)
    return std::make_unique<TableScorer>(TableScorer::load(spec.substr(6)));
  if (spec.rfind("stub:", 0) == 0) {
    return std::make_unique<FrozenTrainableScorer>(
        std::make_unique<TableScorer>(TableScorer::load(spec.substr(5))));
  }
  if (spec == "lexical" || spec.rfind("lexical:", 0) == 0) {
    if (spec.size() > 8) {
      return std::make_unique<LexicalScorer>(
          LexicalScorer::from_json(json::parse(read_file(spec.substr(8)))));
    }
    LexicalScorerOptions options;
    options.learning_rate = config.learning_rate;
    options.hash_bits = config.hash_bits;
    return std::make_unique<LexicalScorer>(options);
  }
  if (spec.rfind("exec:", 0) == 0 || spec.rfind("tcp:", 0) == 0) {
    ExternalScorerOptions options;
    options.trainable = config.scorer_trainable;
    options.timeout = std::chrono::milliseconds(config.scorer_timeout_ms);
    return std::make_unique<ExternalScorer>(open_channel(spec), options);
  }
  throw ConfigError("unknown scorer spec '" + spec + "'");
}

// Commands.

namespace {

std::string utc_now() {
  std::time_t t = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class RunManifest {
 public:
  RunManifest(std::string command, const RunConfig &config)
      : command_(std::move(command)), config_(config), start_(utc_now()) {
    fs::create_directories(config.out_dir);
  }

  // A command that throws still leaves a manifest with a failing status.
  ~RunManifest() {
    if (written_) return;
    try {
      write(1);
    } catch (...) {
    }
  }

  RunManifest(const RunManifest &) = delete;
  RunManifest &operator=(const RunManifest &) = delete;

  fs::path artifact(const std::string &name) {
    fs::path p = fs::path(config_.out_dir) / name;
    artifacts_.push_back(p.string());
    return p;
  }

  void write(int status) {
    written_ = true;
    char hash[20];
    std::snprintf(hash, sizeof(hash), "%016" PRIx64,
                  fnv1a64(config_.to_json().dump()));
    json manifest{{"command", command_},
                  {"config_hash", hash},
                  {"seed", config_.seed},
                  {"start_time", start_},
                  {"end_time", utc_now()},
                  {"exit_status", status},
                  {"artifacts", artifacts_}};
    write_file_atomic(fs::path(config_.out_dir) / "run_manifest.json",
                      manifest.dump(2) + "\n");
  }

 private:
  std::string command_;
  const RunConfig &config_;
  std::string start_;
  std::vector<std::string> artifacts_;
  bool written_ = false;
};

void require_path(const std::string &path, const char *key) {
  if (path.empty()) throw ConfigError(std::string("missing '") + key + "'");
  if (!fs::exists(path))
    throw ConfigError(std::string("'") + key + "' does not exist: " + path);
}

LabelVocabulary load_vocab(const RunConfig &config) {
  require_path(config.vocab_path, "vocab_path");
  if (!config.tier_path.empty()) require_path(config.tier_path, "tier_path");
  return LabelVocabulary::load(config.vocab_path, config.tier_path);
}

Dataset load_split(const RunConfig &config, Split split) {
  const std::string *path = nullptr;
  const char *key = nullptr;
  switch (split) {
    case Split::kTrain: path = &config.train_path; key = "train_path"; break;
    case Split::kDev: path = &config.dev_path; key = "dev_path"; break;
    case Split::kTest: path = &config.test_path; key = "test_path"; break;
  }
  require_path(*path, key);
  return load_ufet_jsonl(*path, config.dataset_name, split);
}

std::string jsonl(const std::vector<json> &records) {
  std::string out;
  for (const auto &r : records) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

}  // namespace

int cmd_render(const RunConfig &config) {
  const LabelVocabulary vocab = load_vocab(config);
  const Dataset data = load_split(config, parse_split(config.split));
  RunManifest manifest("render", config);
  const TemplateKind kind = config.prediction.template_kind;

  std::vector<json> pairs, errors;
  for (const auto &inst : data.instances) {
    std::vector<TypeLabel> positives;
    try {
      positives = positive_closure(inst.gold_labels, vocab);
    } catch (const Error &e) {
      errors.push_back({{"instance_id", inst.id}, {"label", nullptr}, {"error", e.what()}});
      continue;
    }
    for (const auto &p : positives) {
      try {
        pairs.push_back(pair_to_json(build_type_pair(inst, p, kind)));
      } catch (const Error &e) {
        errors.push_back({{"instance_id", inst.id}, {"label", p.raw}, {"error", e.what()}});
      }
    }
    if (kind == TemplateKind::kSubstitution) continue;
    for (const auto &dep : induce_dependency_pairs(positives, vocab)) {
      try {
        pairs.push_back(pair_to_json(build_dependency_pair(inst, dep, kind)));
      } catch (const Error &e) {
        errors.push_back({{"instance_id", inst.id},
                          {"label", dep.descendant.raw + " -> " + dep.ancestor.raw},
                          {"error", e.what()}});
      }
    }
  }
  write_file_atomic(manifest.artifact("pairs.jsonl"), jsonl(pairs));
  write_file_atomic(manifest.artifact("render_errors.jsonl"), jsonl(errors));
  for (const auto &e : errors)
    std::cerr << "render error: " << e["instance_id"].get<std::string>() << ": "
              << e["error"].get<std::string>() << "\n";
  const int status = errors.empty() ? 0 : 2;
  manifest.write(status);
  return status;
}

int cmd_train(const RunConfig &config) {
  std::unique_ptr<EntailmentScorer> scorer = make_scorer(config);
  auto *trainable = dynamic_cast<TrainableScorer *>(scorer.get());
  if (!trainable || !trainable->trainable()) {
    throw ConfigError("scorer '" + config.scorer +
                      "' is not trainable (use lexical, stub:PATH, or an "
                      "external endpoint with scorer_trainable=true)");
  }
  const LabelVocabulary vocab = load_vocab(config);
  const Dataset train_set = load_split(config, Split::kTrain);
  const Dataset dev_set = load_split(config, Split::kDev);
  RunManifest manifest("train", config);

  TrainingResult result = train(train_set, dev_set, vocab, *trainable,
                                config.training, config.prediction);

  std::vector<json> log;
  for (const auto &rec : result.log) log.push_back(rec.to_json());
  write_file_atomic(manifest.artifact("train_log.jsonl"), jsonl(log));
  json best{{"checkpoint", result.best_checkpoint},
            {"dev_f1", result.best_dev_f1},
            {"aborted", result.aborted}};
  if (result.aborted) best["abort_reason"] = result.abort_reason;
  write_file_atomic(manifest.artifact("best_checkpoint.json"), best.dump(2) + "\n");
  if (auto *lexical = dynamic_cast<LexicalScorer *>(trainable)) {
    write_file_atomic(manifest.artifact("lexical_model.json"),
                      lexical->to_json().dump() + "\n");
  }
  const int status = result.aborted ? 1 : 0;
  if (result.aborted)
    std::cerr << "training aborted: " << result.abort_reason << "\n";
  manifest.write(status);
  return status;
}

int cmd_predict(const RunConfig &config) {
  const LabelVocabulary vocab = load_vocab(config);
  const Dataset data = load_split(config, parse_split(config.split));
  std::unique_ptr<EntailmentScorer> scorer = make_scorer(config);
  RunManifest manifest("predict", config);

  PredictionConfig pc = config.prediction;
  if (!config.threshold_path.empty()) {
    require_path(config.threshold_path, "threshold_path");
    pc.threshold = json::parse(read_file(config.threshold_path))
                       .at("threshold")
                       .get<double>();
  }

  std::optional<ScoreCache> cache;
  std::unique_ptr<CachedScorer> cached;
  const EntailmentScorer *active = scorer.get();
  if (!config.cache_path.empty()) {
    cache.emplace(config.cache_path);
    cached = std::make_unique<CachedScorer>(*scorer, *cache);
    active = cached.get();
  }

  std::vector<json> records;
  for (const auto &inst : data.instances) {
    PredictionSet p = predict(
        inst.id, rank_all_candidates(inst, vocab, *active, pc.template_kind), pc);
    records.push_back(prediction_to_json(p, config.topk));
  }
  write_file_atomic(manifest.artifact("predictions.jsonl"), jsonl(records));
  manifest.write(0);
  return 0;
}

int cmd_eval(const RunConfig &config) {
  const Dataset gold = load_split(config, parse_split(config.split));
  const std::string preds_path =
      config.predictions_path.empty()
          ? (fs::path(config.out_dir) / "predictions.jsonl").string()
          : config.predictions_path;
  require_path(preds_path, "predictions_path");

  std::vector<PredictionSet> preds;
  {
    std::ifstream in(preds_path);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      try {
        preds.push_back(prediction_from_json(json::parse(line)));
      } catch (const json::exception &e) {
        throw LoadError(preds_path + " line " + std::to_string(line_no) +
                        ": " + e.what());
      }
    }
  }

  std::vector<LabelBucket> buckets;
  if (!config.bucket_edges.empty()) {
    const Dataset train_set = load_split(config, Split::kTrain);
    buckets = frequency_buckets(train_set, gold, config.bucket_edges);
  }
  RunManifest manifest("eval", config);
  const EvaluationReport report = evaluate(preds, golds_of(gold), buckets);
  write_file_atomic(manifest.artifact("report.json"), report.to_json().dump(2) + "\n");
  write_file_atomic(manifest.artifact("report.txt"), report.to_table());
  std::cout << report.to_table();
  manifest.write(0);
  return 0;
}

int cmd_tune(const RunConfig &config) {
  const LabelVocabulary vocab = load_vocab(config);
  const Dataset dev = load_split(config, Split::kDev);
  std::unique_ptr<EntailmentScorer> scorer = make_scorer(config);
  RunManifest manifest("tune", config);
  const std::vector<double> grid =
      config.grid.empty() ? default_threshold_grid() : config.grid;
  const TuneObjective objective = parse_objective(config.objective);
  const TuneResult result =
      tune_threshold(dev, vocab, *scorer, grid, objective, config.prediction);

  json points = json::array();
  for (const auto &g : result.grid)
    points.push_back({{"threshold", g.threshold}, {"value", g.value}});
  json out{{"threshold", result.threshold},
           {"objective", objective_name(objective)},
           {"value", result.value},
           {"grid", std::move(points)}};
  write_file_atomic(manifest.artifact("threshold.json"), out.dump(2) + "\n");
  std::cout << "threshold " << result.threshold << " ("
            << objective_name(objective) << " " << result.value << ")\n";
  manifest.write(0);
  return 0;
}

int cmd_split_fewshot(const RunConfig &config) {
  const Dataset train_set = load_split(config, Split::kTrain);
  const Dataset test_set = load_split(config, Split::kTest);
  RunManifest manifest("split-fewshot", config);
  const FewShotSplitSpec spec{config.fewshot_fraction, config.seed};
  const FewShotSplit split = make_fewshot_split(train_set, test_set, spec);
  write_file_atomic(manifest.artifact("filtered_train.jsonl"),
                    dataset_to_jsonl(split.filtered_train));
  write_file_atomic(manifest.artifact("fewshot_manifest.json"),
                    fewshot_manifest(split, spec).dump(2) + "\n");
  manifest.write(0);
  return 0;
}

// Entry point.

int run_cli(int argc, char **argv) {
  CLI::App app{"Entity typing as natural language inference"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;

  const std::vector<std::pair<std::string, std::function<int(const RunConfig &)>>>
      commands = {
          {"render", cmd_render},   {"train", cmd_train},
          {"predict", cmd_predict}, {"eval", cmd_eval},
          {"tune", cmd_tune},       {"split-fewshot", cmd_split_fewshot},
      };
  const std::map<std::string, std::string> help = {
      {"render", "Write premise-hypothesis pairs for the gold labels"},
      {"train", "Train a scorer with the ranking objective"},
      {"predict", "Rank the vocabulary and write prediction sets"},
      {"eval", "Score predictions against gold labels"},
      {"tune", "Pick the dev threshold from a grid"},
      {"split-fewshot", "Hold out test labels from the training set"},
  };
  std::vector<CLI::App *> subs;
  for (const auto &[name, fn] : commands) {
    CLI::App *sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config", config_path, "JSON configuration file");
    sub->add_option("--set", overrides, "Override a configuration key")
        ->type_name("KEY=VALUE");
    sub->add_option("--out", out_dir, "Output directory");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  }

  try {
    RunConfig config = load_run_config(config_path, overrides);
    if (!out_dir.empty()) config.out_dir = out_dir;
    for (size_t i = 0; i < subs.size(); ++i) {
      if (subs[i]->parsed()) return commands[i].second(config);
    }
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

int run_cli(const std::vector<std::string> &args) {
  std::vector<std::string> storage = args;
  storage.insert(storage.begin(), "typent");
  std::vector<char *> argv;
  for (auto &s : storage) argv.push_back(s.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace typent
