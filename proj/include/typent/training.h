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

#ifndef TYPENT_TRAINING_H_
#define TYPENT_TRAINING_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "typent/corpus.h"
#include "typent/labelspace.h"
#include "typent/templates.h"

namespace typent {

class EntailmentScorer;
class TrainableScorer;
struct PredictionConfig;

struct TrainingConfig {
  double margin = 0.1;
  double dependency_weight = 0.05;
  size_t negatives_per_positive = 1;
  size_t batch_size = 16;
  size_t max_epochs = 30;
  size_t eval_every = 30;
  TemplateKind template_kind = TemplateKind::kTaxonomic;
  uint64_t seed = 0;

  // Throws ConfigError on out-of-range values.
  void validate() const;
};

// [neg - pos + margin]_+, rounded once from the exact value. Summing in
// extended precision keeps the zero set exact for scores in [0, 1]; a plain
// double sum can return 0 when the margin is missed by less than an ulp.
inline double margin_ranking_loss(double pos_score, double neg_score,
                                  double margin) {
  const long double x = static_cast<long double>(neg_score) - pos_score + margin;
  return x > 0.0L ? static_cast<double>(x) : 0.0;
}

struct RankedExample {
  PremiseHypothesisPair positive;
  std::vector<PremiseHypothesisPair> negatives;
  PairKind kind = PairKind::kType;
};

struct LossReport {
  double type_loss = 0.0;
  double dependency_loss = 0.0;
  double joint = 0.0;
  size_t type_examples = 0;
  size_t dependency_examples = 0;
};

// One type example per positive (gold plus induced ancestors) and one
// dependency example per induced dependency pair, each with k sampled
// negatives. Dependency examples are skipped for the substitution template.
std::vector<RankedExample> build_examples_for_instance(
    const MentionInstance &instance, const LabelVocabulary &vocab,
    const TrainingConfig &config, Rng &rng);

// Per-instance objective: mean type loss + lambda * mean dependency loss,
// where each example's loss is the mean over its negatives.
LossReport instance_loss(std::span<const RankedExample> examples,
                         const EntailmentScorer &scorer,
                         const TrainingConfig &config);

struct TrainingLogRecord {
  size_t epoch = 0;
  double dev_p = 0.0;
  double dev_r = 0.0;
  double dev_f1 = 0.0;
  // Unset for the evaluation that precedes the first epoch.
  std::optional<double> type_loss;
  std::optional<double> dep_loss;
  std::string checkpoint;

  nlohmann::json to_json() const;
};

struct TrainingResult {
  std::string best_checkpoint;
  double best_dev_f1 = 0.0;
  std::vector<TrainingLogRecord> log;
  bool aborted = false;
  std::string abort_reason;
};

// Keeps the checkpoint with the strictly best dev F1 seen so far.
class BestCheckpointTracker {
 public:
  // Returns true when `f1` improves on the best so far; `take_snapshot` is
  // only called in that case.
  bool observe(double f1, const std::function<std::string()> &take_snapshot);

  bool has_best() const { return best_.has_value(); }
  const std::string &best_tag() const { return best_tag_; }
  double best_f1() const { return best_.value_or(0.0); }

 private:
  std::optional<double> best_;
  std::string best_tag_;
};

struct TrainingHooks {
  // Called with every batch before it is accumulated.
  std::function<void(size_t epoch, std::span<const RankedExample>)> on_batch;
};

// Epoch loop: examples are rebuilt with fresh negatives every epoch, shuffled,
// and fed to the scorer in batches with one update per batch. Dev loose-macro
// F1 is measured before training and every eval_every epochs; the best
// checkpoint is restored before returning.
TrainingResult train(const Dataset &train_set, const Dataset &dev_set,
                     const LabelVocabulary &vocab, TrainableScorer &scorer,
                     const TrainingConfig &config,
                     const PredictionConfig &predict_config,
                     const TrainingHooks &hooks = {});

}  // namespace typent

#endif  // TYPENT_TRAINING_H_
