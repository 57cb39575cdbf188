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

#ifndef TYPENT_SCORING_H_
#define TYPENT_SCORING_H_

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "typent/templates.h"

namespace typent {

// Maps a premise/hypothesis pair to an entailment score in [0, 1].
// score_batch(ps)[i] must equal score(ps[i]); batching is an optimization.
class EntailmentScorer {
 public:
  virtual ~EntailmentScorer() = default;

  virtual double score(const PremiseHypothesisPair &pair) const = 0;
  virtual std::vector<double> score_batch(
      std::span<const PremiseHypothesisPair> pairs) const;

  // Identifies the current parameter state. Two calls returning the same tag
  // must score identically.
  virtual std::string version_tag() const = 0;

  virtual bool trainable() const { return false; }
};

// A scorer that learns from margin ranking feedback.
class TrainableScorer : public EntailmentScorer {
 public:
  bool trainable() const override { return true; }

  // Returns the mean over negatives of the margin ranking loss of the
  // positive against each negative, and accumulates weight times its gradient
  // for the next apply_update().
  virtual double accumulate_ranking_loss(
      const PremiseHypothesisPair &positive,
      std::span<const PremiseHypothesisPair> negatives, double margin,
      double weight) = 0;

  // Applies and clears the accumulated gradient.
  virtual void apply_update() = 0;

  // Checkpointing. restore(tag) must reproduce the scores seen at snapshot
  // time bit for bit.
  virtual std::string snapshot() = 0;
  virtual void restore(const std::string &tag) = 0;
};

// Lookup table fixture. Unknown pairs score `default_score`.
class TableScorer : public EntailmentScorer {
 public:
  explicit TableScorer(double default_score = 0.0);

  void set(std::string premise, std::string hypothesis, double score);

  // JSONL records {premise, hypothesis, score}; an optional first-class
  // record {"default": x} sets the default.
  static TableScorer load(const std::filesystem::path &path);

  double score(const PremiseHypothesisPair &pair) const override;
  std::string version_tag() const override;

  size_t size() const { return table_.size(); }
  double default_score() const { return default_; }

 private:
  std::map<std::pair<std::string, std::string>, double> table_;
  double default_;
};

// Lowercased tokens with edge punctuation split off as separate tokens.
std::vector<std::string> overlap_tokens(std::string_view text);

// Share of the hypothesis' content tokens that also occur in the premise.
double overlap_score(const PremiseHypothesisPair &pair);

class OverlapScorer : public EntailmentScorer {
 public:
  double score(const PremiseHypothesisPair &pair) const override {
    return overlap_score(pair);
  }
  std::string version_tag() const override { return "overlap-v1"; }
};

// Adapts a fixed scorer to the trainable contract. Losses are reported but
// updates change nothing.
class FrozenTrainableScorer : public TrainableScorer {
 public:
  explicit FrozenTrainableScorer(std::unique_ptr<EntailmentScorer> inner);

  double score(const PremiseHypothesisPair &pair) const override;
  std::vector<double> score_batch(
      std::span<const PremiseHypothesisPair> pairs) const override;
  std::string version_tag() const override;

  double accumulate_ranking_loss(const PremiseHypothesisPair &positive,
                                 std::span<const PremiseHypothesisPair> negatives,
                                 double margin, double weight) override;
  void apply_update() override {}
  std::string snapshot() override;
  void restore(const std::string &tag) override;

 private:
  std::unique_ptr<EntailmentScorer> inner_;
  size_t snapshots_ = 0;
};

struct LexicalScorerOptions {
  int hash_bits = 18;
  double learning_rate = 1.0;
  // Initial weights make the untrained model a squashed overlap score.
  double initial_bias = -2.0;
  double initial_overlap_weight = 4.0;
};

// Trainable logistic model over hashed lexical features of the pair: the
// overlap ratio, hypothesis content tokens, and premise x hypothesis token
// crosses. A desk-scale stand-in for a fine-tuned NLI model.
class LexicalScorer : public TrainableScorer {
 public:
  explicit LexicalScorer(LexicalScorerOptions options = {});

  double score(const PremiseHypothesisPair &pair) const override;
  std::string version_tag() const override;

  double accumulate_ranking_loss(const PremiseHypothesisPair &positive,
                                 std::span<const PremiseHypothesisPair> negatives,
                                 double margin, double weight) override;
  void apply_update() override;
  std::string snapshot() override;
  void restore(const std::string &tag) override;

  nlohmann::json to_json() const;
  static LexicalScorer from_json(const nlohmann::json &model);

  const LexicalScorerOptions &options() const { return options_; }

 private:
  struct Features {
    double overlap = 0.0;
    std::vector<std::pair<uint32_t, double>> sparse;
  };
  struct Params {
    double bias = 0.0;
    double overlap_weight = 0.0;
    std::vector<double> weights;
    uint64_t version = 0;
  };

  Features featurize(const PremiseHypothesisPair &pair) const;
  double logit(const Features &f) const;
  void accumulate_gradient(const Features &f, double coeff);

  LexicalScorerOptions options_;
  Params params_;
  double grad_bias_ = 0.0;
  double grad_overlap_ = 0.0;
  std::unordered_map<uint32_t, double> grad_;
  std::map<std::string, Params> snapshots_;
};

// Persistent score cache keyed by (scorer version tag, FNV-1a 64 of the
// premise, FNV-1a 64 of the hypothesis). The backing file is append-only,
// one tab-separated record per line:
//   <version_tag>\t<hash64(premise) hex>\t<hash64(hypothesis) hex>\t<score>
class ScoreCache {
 public:
  ScoreCache() = default;
  explicit ScoreCache(std::filesystem::path path);

  std::optional<double> lookup(std::string_view version,
                               std::string_view premise,
                               std::string_view hypothesis) const;
  void store(std::string_view version, std::string_view premise,
             std::string_view hypothesis, double score);

  // Drops in-memory entries of every other version.
  void invalidate_except(std::string_view version);

  size_t size() const;

 private:
  struct Key {
    std::string version;
    uint64_t premise_hash;
    uint64_t hypothesis_hash;
    bool operator==(const Key &) const = default;
  };
  struct KeyHash {
    size_t operator()(const Key &k) const {
      return std::hash<std::string>()(k.version) ^ (k.premise_hash * 31) ^
             (k.hypothesis_hash * 1000003);
    }
  };

  std::filesystem::path path_;
  std::ofstream appender_;
  mutable std::shared_mutex mu_;
  std::unordered_map<Key, double, KeyHash> entries_;
};

// Scores through a cache, invalidating it when the inner version changes.
class CachedScorer : public EntailmentScorer {
 public:
  CachedScorer(const EntailmentScorer &inner, ScoreCache &cache)
      : inner_(inner), cache_(cache) {}

  double score(const PremiseHypothesisPair &pair) const override;
  std::vector<double> score_batch(
      std::span<const PremiseHypothesisPair> pairs) const override;
  std::string version_tag() const override { return inner_.version_tag(); }

  size_t hits() const { return hits_.load(); }
  size_t misses() const { return misses_.load(); }

 private:
  void sync_version(const std::string &version) const;

  const EntailmentScorer &inner_;
  ScoreCache &cache_;
  mutable std::mutex version_mu_;
  mutable std::string last_version_;
  mutable std::atomic<size_t> hits_{0};
  mutable std::atomic<size_t> misses_{0};
};

}  // namespace typent

#endif  // TYPENT_SCORING_H_
