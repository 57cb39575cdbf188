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

#include "typent/scoring.h"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <unordered_set>

#include "typent/errors.h"
#include "typent/training.h"
#include "typent/util.h"

namespace typent {

using nlohmann::json;

std::vector<double> EntailmentScorer::score_batch(
    std::span<const PremiseHypothesisPair> pairs) const {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto &p : pairs) out.push_back(score(p));
  return out;
}

// TableScorer.

TableScorer::TableScorer(double default_score) : default_(default_score) {
  if (!(default_score >= 0.0 && default_score <= 1.0))
    throw ConfigError("table default score must lie in [0, 1]");
}

void TableScorer::set(std::string premise, std::string hypothesis,
                      double score) {
  if (!(score >= 0.0 && score <= 1.0))
    throw ConfigError("table score must lie in [0, 1]");
  table_[{std::move(premise), std::move(hypothesis)}] = score;
}

TableScorer TableScorer::load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open score table " + path.string());
  TableScorer table;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error &e) {
      throw LoadError(path.string() + " line " + std::to_string(line_no) +
                      ": malformed JSON");
    }
    if (rec.contains("default")) {
      table.default_ = rec.at("default").get<double>();
      continue;
    }
    for (const char *key : {"premise", "hypothesis", "score"}) {
      if (!rec.contains(key)) {
        throw SchemaError(path.string() + " line " + std::to_string(line_no) +
                          ": missing key '" + key + "'");
      }
    }
    table.set(rec["premise"].get<std::string>(),
              rec["hypothesis"].get<std::string>(), rec["score"].get<double>());
  }
  return table;
}

double TableScorer::score(const PremiseHypothesisPair &pair) const {
  auto it = table_.find({pair.premise, pair.hypothesis});
  return it == table_.end() ? default_ : it->second;
}

std::string TableScorer::version_tag() const {
  uint64_t h = kFnvOffsetBasis;
  char buf[32];
  for (const auto &[key, value] : table_) {
    h = fnv1a64(key.first, h);
    h = fnv1a64("\t", h);
    h = fnv1a64(key.second, h);
    std::snprintf(buf, sizeof(buf), "\t%.17g\n", value);
    h = fnv1a64(buf, h);
  }
  std::snprintf(buf, sizeof(buf), "%.17g", default_);
  h = fnv1a64(buf, h);
  std::snprintf(buf, sizeof(buf), "table-%016" PRIx64, h);
  return buf;
}

// Overlap scoring.

namespace {

bool is_edge_punct(char c) {
  switch (c) {
    case '.': case ',': case ';': case ':': case '!': case '?':
    case '"': case '\'': case '(': case ')': case '[': case ']':
    case '{': case '}':
      return true;
    default:
      return false;
  }
}

const std::unordered_set<std::string> &scaffold_tokens() {
  static const std::unordered_set<std::string> kScaffold = {
      "is", "a", "in", "this", "context", "referring", "to", ".", ","};
  return kScaffold;
}

std::set<std::string> content_tokens(std::string_view hypothesis) {
  std::set<std::string> out;
  for (auto &t : overlap_tokens(hypothesis))
    if (!scaffold_tokens().count(t)) out.insert(std::move(t));
  return out;
}

}  // namespace

std::vector<std::string> overlap_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (const auto &word : split_whitespace(to_lower_ascii(text))) {
    size_t b = 0, e = word.size();
    std::vector<std::string> leading, trailing;
    while (b < e && is_edge_punct(word[b])) leading.emplace_back(1, word[b++]);
    while (e > b && is_edge_punct(word[e - 1]))
      trailing.emplace_back(1, word[--e]);
    out.insert(out.end(), leading.begin(), leading.end());
    if (e > b) out.emplace_back(word.substr(b, e - b));
    out.insert(out.end(), trailing.rbegin(), trailing.rend());
  }
  return out;
}

double overlap_score(const PremiseHypothesisPair &pair) {
  const std::set<std::string> hyp = content_tokens(pair.hypothesis);
  if (hyp.empty()) return 0.0;
  const auto premise_tokens = overlap_tokens(pair.premise);
  const std::unordered_set<std::string> premise(premise_tokens.begin(),
                                                premise_tokens.end());
  size_t shared = 0;
  for (const auto &t : hyp) shared += premise.count(t);
  return static_cast<double>(shared) / static_cast<double>(hyp.size());
}

// FrozenTrainableScorer.

FrozenTrainableScorer::FrozenTrainableScorer(
    std::unique_ptr<EntailmentScorer> inner)
    : inner_(std::move(inner)) {}

double FrozenTrainableScorer::score(const PremiseHypothesisPair &pair) const {
  return inner_->score(pair);
}

std::vector<double> FrozenTrainableScorer::score_batch(
    std::span<const PremiseHypothesisPair> pairs) const {
  return inner_->score_batch(pairs);
}

std::string FrozenTrainableScorer::version_tag() const {
  return "frozen/" + inner_->version_tag();
}

double FrozenTrainableScorer::accumulate_ranking_loss(
    const PremiseHypothesisPair &positive,
    std::span<const PremiseHypothesisPair> negatives, double margin,
    double /*weight*/) {
  if (negatives.empty()) return 0.0;
  const double pos = inner_->score(positive);
  double total = 0.0;
  for (double neg : inner_->score_batch(negatives))
    total += margin_ranking_loss(pos, neg, margin);
  return total / static_cast<double>(negatives.size());
}

std::string FrozenTrainableScorer::snapshot() {
  return "frozen-" + std::to_string(snapshots_++);
}

void FrozenTrainableScorer::restore(const std::string &tag) {
  if (tag.rfind("frozen-", 0) != 0)
    throw TrainingError("unknown checkpoint '" + tag + "'");
}

// LexicalScorer.

namespace {

double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z))
                : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace

LexicalScorer::LexicalScorer(LexicalScorerOptions options)
    : options_(options) {
  if (options_.hash_bits < 4 || options_.hash_bits > 26)
    throw ConfigError("hash_bits must lie in [4, 26]");
  params_.bias = options_.initial_bias;
  params_.overlap_weight = options_.initial_overlap_weight;
  params_.weights.assign(size_t{1} << options_.hash_bits, 0.0);
}

LexicalScorer::Features LexicalScorer::featurize(
    const PremiseHypothesisPair &pair) const {
  Features f;
  f.overlap = overlap_score(pair);
  const std::set<std::string> hyp = content_tokens(pair.hypothesis);
  std::set<std::string> premise;
  for (auto &t : overlap_tokens(pair.premise))
    if (!scaffold_tokens().count(t)) premise.insert(std::move(t));
  if (hyp.empty()) return f;

  const uint32_t mask = (uint32_t{1} << options_.hash_bits) - 1;
  const double unary = 1.0 / std::sqrt(static_cast<double>(hyp.size()));
  const double cross =
      premise.empty()
          ? 0.0
          : 1.0 / std::sqrt(static_cast<double>(hyp.size() * premise.size()));
  for (const auto &h : hyp) {
    uint64_t hh = fnv1a64(h, fnv1a64("h:"));
    f.sparse.emplace_back(static_cast<uint32_t>(hh & mask), unary);
    for (const auto &p : premise) {
      uint64_t hc = fnv1a64(p, fnv1a64("|", hh));
      f.sparse.emplace_back(static_cast<uint32_t>(hc & mask), cross);
    }
  }
  return f;
}

double LexicalScorer::logit(const Features &f) const {
  double z = params_.bias + params_.overlap_weight * f.overlap;
  for (const auto &[idx, value] : f.sparse) z += params_.weights[idx] * value;
  return z;
}

double LexicalScorer::score(const PremiseHypothesisPair &pair) const {
  return sigmoid(logit(featurize(pair)));
}

std::string LexicalScorer::version_tag() const {
  return "lexical-v" + std::to_string(params_.version);
}

void LexicalScorer::accumulate_gradient(const Features &f, double coeff) {
  grad_bias_ += coeff;
  grad_overlap_ += coeff * f.overlap;
  for (const auto &[idx, value] : f.sparse) grad_[idx] += coeff * value;
}

double LexicalScorer::accumulate_ranking_loss(
    const PremiseHypothesisPair &positive,
    std::span<const PremiseHypothesisPair> negatives, double margin,
    double weight) {
  if (negatives.empty()) return 0.0;
  const Features pos_f = featurize(positive);
  const double pos = sigmoid(logit(pos_f));
  const double scale = weight / static_cast<double>(negatives.size());
  double total = 0.0;
  for (const auto &negative : negatives) {
    const Features neg_f = featurize(negative);
    const double neg = sigmoid(logit(neg_f));
    const double loss = margin_ranking_loss(pos, neg, margin);
    total += loss;
    if (loss > 0.0) {
      accumulate_gradient(neg_f, scale * neg * (1.0 - neg));
      accumulate_gradient(pos_f, -scale * pos * (1.0 - pos));
    }
  }
  return total / static_cast<double>(negatives.size());
}

void LexicalScorer::apply_update() {
  const double lr = options_.learning_rate;
  params_.bias -= lr * grad_bias_;
  params_.overlap_weight -= lr * grad_overlap_;
  // Apply in index order so the result does not depend on hash-map layout.
  std::vector<std::pair<uint32_t, double>> grads(grad_.begin(), grad_.end());
  std::sort(grads.begin(), grads.end());
  for (const auto &[idx, g] : grads) params_.weights[idx] -= lr * g;
  grad_bias_ = grad_overlap_ = 0.0;
  grad_.clear();
  ++params_.version;
}

std::string LexicalScorer::snapshot() {
  std::string tag = "lexical-ckpt-" + std::to_string(snapshots_.size()) +
                    "-v" + std::to_string(params_.version);
  snapshots_[tag] = params_;
  return tag;
}

void LexicalScorer::restore(const std::string &tag) {
  auto it = snapshots_.find(tag);
  if (it == snapshots_.end())
    throw TrainingError("unknown checkpoint '" + tag + "'");
  params_ = it->second;
  grad_bias_ = grad_overlap_ = 0.0;
  grad_.clear();
}

json LexicalScorer::to_json() const {
  json weights = json::array();
  for (size_t i = 0; i < params_.weights.size(); ++i) {
    if (params_.weights[i] != 0.0) weights.push_back({i, params_.weights[i]});
  }
  return json{{"model", "lexical"},
              {"hash_bits", options_.hash_bits},
              {"learning_rate", options_.learning_rate},
              {"bias", params_.bias},
              {"overlap_weight", params_.overlap_weight},
              {"version", params_.version},
              {"weights", std::move(weights)}};
}

LexicalScorer LexicalScorer::from_json(const json &model) {
  if (model.value("model", "") != "lexical")
    throw SchemaError("not a lexical scorer model");
  LexicalScorerOptions options;
  options.hash_bits = model.at("hash_bits").get<int>();
  options.learning_rate = model.value("learning_rate", options.learning_rate);
  LexicalScorer scorer(options);
  scorer.params_.bias = model.at("bias").get<double>();
  scorer.params_.overlap_weight = model.at("overlap_weight").get<double>();
  scorer.params_.version = model.value("version", uint64_t{0});
  for (const auto &entry : model.at("weights")) {
    const size_t idx = entry.at(0).get<size_t>();
    if (idx >= scorer.params_.weights.size())
      throw SchemaError("weight index out of range");
    scorer.params_.weights[idx] = entry.at(1).get<double>();
  }
  return scorer;
}

// ScoreCache.

ScoreCache::ScoreCache(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) return;
  std::string line;
  while (std::getline(in, line)) {
    auto fields = split_whitespace(line);
    if (fields.size() != 4) continue;
    try {
      Key key{fields[0], std::stoull(fields[1], nullptr, 16),
              std::stoull(fields[2], nullptr, 16)};
      entries_[std::move(key)] = std::stod(fields[3]);
    } catch (const std::exception &) {
      // A torn trailing record from an interrupted append.
      continue;
    }
  }
}

std::optional<double> ScoreCache::lookup(std::string_view version,
                                         std::string_view premise,
                                         std::string_view hypothesis) const {
  Key key{std::string(version), fnv1a64(premise), fnv1a64(hypothesis)};
  std::shared_lock lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ScoreCache::store(std::string_view version, std::string_view premise,
                       std::string_view hypothesis, double score) {
  if (version.find_first_of(" \t\n") != std::string_view::npos)
    throw ConfigError("scorer version tag must not contain whitespace");
  Key key{std::string(version), fnv1a64(premise), fnv1a64(hypothesis)};
  std::unique_lock lock(mu_);
  entries_[key] = score;
  if (!path_.empty()) {
    if (!appender_.is_open()) {
      appender_.open(path_, std::ios::app);
      if (!appender_)
        throw Error("io", "cannot append to cache " + path_.string());
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "\t%016" PRIx64 "\t%016" PRIx64 "\t%.17g\n",
                  key.premise_hash, key.hypothesis_hash, score);
    appender_ << key.version << buf;
    appender_.flush();
  }
}

void ScoreCache::invalidate_except(std::string_view version) {
  std::unique_lock lock(mu_);
  std::erase_if(entries_,
                [&](const auto &kv) { return kv.first.version != version; });
}

size_t ScoreCache::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

// CachedScorer.

void CachedScorer::sync_version(const std::string &version) const {
  std::lock_guard lock(version_mu_);
  if (version != last_version_) {
    cache_.invalidate_except(version);
    last_version_ = version;
  }
}

double CachedScorer::score(const PremiseHypothesisPair &pair) const {
  const PremiseHypothesisPair *p = &pair;
  return score_batch(std::span<const PremiseHypothesisPair>(p, 1)).front();
}

std::vector<double> CachedScorer::score_batch(
    std::span<const PremiseHypothesisPair> pairs) const {
  const std::string version = inner_.version_tag();
  sync_version(version);
  std::vector<double> out(pairs.size());
  std::vector<size_t> miss_index;
  std::vector<PremiseHypothesisPair> misses;
  for (size_t i = 0; i < pairs.size(); ++i) {
    if (auto hit = cache_.lookup(version, pairs[i].premise, pairs[i].hypothesis)) {
      out[i] = *hit;
    } else {
      miss_index.push_back(i);
      misses.push_back(pairs[i]);
    }
  }
  hits_ += pairs.size() - misses.size();
  misses_ += misses.size();
  if (!misses.empty()) {
    std::vector<double> fresh = inner_.score_batch(misses);
    for (size_t j = 0; j < misses.size(); ++j) {
      out[miss_index[j]] = fresh[j];
      cache_.store(version, misses[j].premise, misses[j].hypothesis, fresh[j]);
    }
  }
  return out;
}

}  // namespace typent
