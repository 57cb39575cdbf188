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

#include "typent/training.h"

#include <utility>

#include "typent/errors.h"
#include "typent/evaluation.h"
#include "typent/inference.h"
#include "typent/scoring.h"

namespace typent {

using nlohmann::json;

void TrainingConfig::validate() const {
  if (!(margin >= 0.0)) throw ConfigError("margin must be nonnegative");
  if (!(dependency_weight >= 0.0))
    throw ConfigError("dependency weight (lambda) must be nonnegative");
  if (negatives_per_positive < 1)
    throw ConfigError("negatives_per_positive must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
  if (eval_every < 1) throw ConfigError("eval_every must be at least 1");
}

std::vector<RankedExample> build_examples_for_instance(
    const MentionInstance &instance, const LabelVocabulary &vocab,
    const TrainingConfig &config, Rng &rng) {
  if (instance.gold_labels.empty()) {
    throw ValidationError("instance '" + instance.id +
                          "' has no gold labels to train on");
  }
  const std::vector<TypeLabel> positives =
      positive_closure(instance.gold_labels, vocab);
  LabelSet positive_raws;
  for (const auto &p : positives) positive_raws.insert(p.raw);

  std::vector<RankedExample> out;
  for (const auto &p : positives) {
    RankedExample ex;
    ex.kind = PairKind::kType;
    ex.positive = build_type_pair(instance, p, config.template_kind);
    for (size_t j = 0; j < config.negatives_per_positive; ++j) {
      const TypeLabel &neg = sample_negative_type(vocab, positive_raws, rng);
      ex.negatives.push_back(
          build_type_pair(instance, neg, config.template_kind));
    }
    out.push_back(std::move(ex));
  }

  if (config.template_kind == TemplateKind::kSubstitution) return out;

  for (const auto &dep : induce_dependency_pairs(positives, vocab)) {
    RankedExample ex;
    ex.kind = PairKind::kDependency;
    ex.positive = build_dependency_pair(instance, dep, config.template_kind);
    for (size_t j = 0; j < config.negatives_per_positive; ++j) {
      const TypeLabel &neg =
          sample_negative_ancestor(dep, vocab, positive_raws, rng);
      ex.negatives.push_back(build_dependency_pair(
          instance, DependencyPair{dep.descendant, neg}, config.template_kind));
    }
    out.push_back(std::move(ex));
  }
  return out;
}

namespace {

double example_loss(const RankedExample &ex, const EntailmentScorer &scorer,
                    double margin) {
  if (ex.negatives.empty()) return 0.0;
  std::vector<PremiseHypothesisPair> batch;
  batch.reserve(ex.negatives.size() + 1);
  batch.push_back(ex.positive);
  batch.insert(batch.end(), ex.negatives.begin(), ex.negatives.end());
  const std::vector<double> scores = scorer.score_batch(batch);
  double total = 0.0;
  for (size_t i = 1; i < scores.size(); ++i)
    total += margin_ranking_loss(scores[0], scores[i], margin);
  return total / static_cast<double>(ex.negatives.size());
}

}  // namespace

LossReport instance_loss(std::span<const RankedExample> examples,
                         const EntailmentScorer &scorer,
                         const TrainingConfig &config) {
  LossReport report;
  double type_sum = 0.0, dep_sum = 0.0;
  for (const auto &ex : examples) {
    const double loss = example_loss(ex, scorer, config.margin);
    if (ex.kind == PairKind::kType) {
      type_sum += loss;
      ++report.type_examples;
    } else {
      dep_sum += loss;
      ++report.dependency_examples;
    }
  }
  if (report.type_examples)
    report.type_loss = type_sum / static_cast<double>(report.type_examples);
  if (report.dependency_examples) {
    report.dependency_loss =
        dep_sum / static_cast<double>(report.dependency_examples);
  }
  report.joint = report.type_loss + config.dependency_weight * report.dependency_loss;
  return report;
}

json TrainingLogRecord::to_json() const {
  json rec{{"epoch", epoch},
           {"dev_p", dev_p},
           {"dev_r", dev_r},
           {"dev_f1", dev_f1},
           {"type_loss", type_loss ? json(*type_loss) : json()},
           {"dep_loss", dep_loss ? json(*dep_loss) : json()}};
  if (!checkpoint.empty()) rec["checkpoint"] = checkpoint;
  return rec;
}

bool BestCheckpointTracker::observe(
    double f1, const std::function<std::string()> &take_snapshot) {
  if (best_ && !(f1 > *best_)) return false;
  best_tag_ = take_snapshot();
  best_ = f1;
  return true;
}

namespace {

struct WeightedExample {
  RankedExample example;
  // Share of the instance-level objective carried by this example, before
  // the dependency weight.
  double share = 0.0;
};

PRF evaluate_dev(const Dataset &dev, const LabelVocabulary &vocab,
                 const EntailmentScorer &scorer,
                 const PredictionConfig &predict_config) {
  std::vector<PredictionSet> preds;
  preds.reserve(dev.instances.size());
  for (const auto &inst : dev.instances) {
    preds.push_back(predict(
        inst.id,
        rank_all_candidates(inst, vocab, scorer, predict_config.template_kind),
        predict_config));
  }
  return loose_macro(preds, golds_of(dev));
}

}  // namespace

TrainingResult train(const Dataset &train_set, const Dataset &dev_set,
                     const LabelVocabulary &vocab, TrainableScorer &scorer,
                     const TrainingConfig &config,
                     const PredictionConfig &predict_config,
                     const TrainingHooks &hooks) {
  config.validate();
  if (train_set.instances.empty()) throw TrainingError("empty training set");
  if (dev_set.instances.empty()) throw TrainingError("empty dev set");
  if (!scorer.trainable())
    throw ConfigError("scorer does not support training");

  PredictionConfig eval_config = predict_config;
  eval_config.template_kind = config.template_kind;

  TrainingResult result;
  BestCheckpointTracker tracker;

  auto run_eval = [&](size_t epoch, std::optional<double> type_loss,
                      std::optional<double> dep_loss) {
    const PRF m = evaluate_dev(dev_set, vocab, scorer, eval_config);
    TrainingLogRecord rec;
    rec.epoch = epoch;
    rec.dev_p = m.precision;
    rec.dev_r = m.recall;
    rec.dev_f1 = m.f1;
    rec.type_loss = type_loss;
    rec.dep_loss = dep_loss;
    if (tracker.observe(m.f1, [&] { return scorer.snapshot(); }))
      rec.checkpoint = tracker.best_tag();
    result.log.push_back(rec);
  };

  run_eval(0, std::nullopt, std::nullopt);

  const double n_instances = static_cast<double>(train_set.instances.size());
  for (size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::vector<WeightedExample> examples;
    for (const auto &inst : train_set.instances) {
      Rng rng = Rng::substream(
          config.seed, "sampling/" + std::to_string(epoch) + "/" + inst.id);
      std::vector<RankedExample> built =
          build_examples_for_instance(inst, vocab, config, rng);
      size_t n_type = 0, n_dep = 0;
      for (const auto &ex : built) (ex.kind == PairKind::kType ? n_type : n_dep)++;
      for (auto &ex : built) {
        const size_t n = ex.kind == PairKind::kType ? n_type : n_dep;
        examples.push_back({std::move(ex), 1.0 / (static_cast<double>(n) * n_instances)});
      }
    }
    Rng shuffle_rng =
        Rng::substream(config.seed, "shuffle/" + std::to_string(epoch));
    shuffle_rng.shuffle(examples);

    double type_loss = 0.0, dep_loss = 0.0;
    try {
      std::vector<RankedExample> batch;
      for (size_t start = 0; start < examples.size();
           start += config.batch_size) {
        const size_t end = std::min(examples.size(), start + config.batch_size);
        if (hooks.on_batch) {
          batch.clear();
          for (size_t i = start; i < end; ++i)
            batch.push_back(examples[i].example);
          hooks.on_batch(epoch, batch);
        }
        for (size_t i = start; i < end; ++i) {
          const WeightedExample &we = examples[i];
          const bool is_type = we.example.kind == PairKind::kType;
          const double weight =
              is_type ? we.share : config.dependency_weight * we.share;
          const double loss = scorer.accumulate_ranking_loss(
              we.example.positive, we.example.negatives, config.margin,
              weight);
          (is_type ? type_loss : dep_loss) += we.share * loss;
        }
        scorer.apply_update();
      }
    } catch (const std::exception &e) {
      result.aborted = true;
      result.abort_reason = "epoch " + std::to_string(epoch) + ": " + e.what();
      break;
    }

    if (epoch % config.eval_every == 0 || epoch == config.max_epochs)
      run_eval(epoch, type_loss, dep_loss);
  }

  result.best_checkpoint = tracker.best_tag();
  result.best_dev_f1 = tracker.best_f1();
  try {
    scorer.restore(result.best_checkpoint);
  } catch (const std::exception &e) {
    if (!result.aborted) throw;
    result.abort_reason += std::string("; restore failed: ") + e.what();
  }
  return result;
}

}  // namespace typent
