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

#include "typent/inference.h"

#include <algorithm>
#include <cmath>

#include "typent/errors.h"
#include "typent/evaluation.h"
#include "typent/scoring.h"

namespace typent {

using nlohmann::json;

Fallback Fallback::parse(std::string_view text) {
  if (text == "top1") return top1();
  if (text == "empty") return none();
  if (text.rfind("other:", 0) == 0 && text.size() > 6)
    return other(std::string(text.substr(6)));
  throw ConfigError("unknown fallback '" + std::string(text) +
                    "' (expected top1, empty or other:LABEL)");
}

std::string Fallback::to_string() const {
  switch (kind) {
    case FallbackKind::kTop1: return "top1";
    case FallbackKind::kEmpty: return "empty";
    case FallbackKind::kOtherLabel: return "other:" + other_label;
  }
  return "top1";
}

void sort_ranking(std::vector<ScoredLabel> &ranking) {
  std::sort(ranking.begin(), ranking.end(),
            [](const ScoredLabel &a, const ScoredLabel &b) {
              if (a.score != b.score) return a.score > b.score;
              return a.label.raw < b.label.raw;
            });
}

std::vector<ScoredLabel> rank_all_candidates(const MentionInstance &instance,
                                             const LabelVocabulary &vocab,
                                             const EntailmentScorer &scorer,
                                             TemplateKind template_kind) {
  if (vocab.empty()) throw ConfigError("empty label vocabulary");
  std::vector<ScoredLabel> ranking;
  ranking.reserve(vocab.size());
  std::vector<PremiseHypothesisPair> pairs;
  std::vector<size_t> pair_slot;
  pairs.reserve(vocab.size());
  for (const auto &label : vocab.labels()) {
    ranking.push_back({label, 0.0, false});
    try {
      pairs.push_back(build_type_pair(instance, label, template_kind));
      pair_slot.push_back(ranking.size() - 1);
    } catch (const RenderError &) {
      ranking.back().render_failed = true;
    }
  }
  if (!pairs.empty()) {
    std::vector<double> scores = scorer.score_batch(pairs);
    if (scores.size() != pairs.size())
      throw ProtocolError("scorer returned a batch of the wrong length");
    for (size_t i = 0; i < scores.size(); ++i)
      ranking[pair_slot[i]].score = scores[i];
  }
  sort_ranking(ranking);
  return ranking;
}

LabelSet labels_above(const std::vector<ScoredLabel> &ranking,
                      double threshold) {
  LabelSet out;
  for (const auto &s : ranking)
    if (s.score >= threshold) out.insert(s.label.raw);
  return out;
}

PredictionSet predict(std::string instance_id,
                      std::vector<ScoredLabel> ranking,
                      const PredictionConfig &config) {
  if (ranking.empty()) throw ConfigError("cannot predict from an empty ranking");
  PredictionSet out;
  out.instance_id = std::move(instance_id);
  out.chosen = labels_above(ranking, config.threshold);
  if (out.chosen.empty()) {
    switch (config.fallback.kind) {
      case FallbackKind::kTop1:
        out.chosen.insert(ranking.front().label.raw);
        break;
      case FallbackKind::kOtherLabel:
        out.chosen.insert(config.fallback.other_label);
        break;
      case FallbackKind::kEmpty:
        break;
    }
  }
  out.ranking = std::move(ranking);
  return out;
}

TuneObjective parse_objective(std::string_view name) {
  if (name == "loose_macro_f1") return TuneObjective::kLooseMacroF1;
  if (name == "micro_f1") return TuneObjective::kMicroF1;
  if (name == "strict_accuracy") return TuneObjective::kStrictAccuracy;
  throw ConfigError("unknown objective '" + std::string(name) + "'");
}

std::string_view objective_name(TuneObjective objective) {
  switch (objective) {
    case TuneObjective::kLooseMacroF1: return "loose_macro_f1";
    case TuneObjective::kMicroF1: return "micro_f1";
    case TuneObjective::kStrictAccuracy: return "strict_accuracy";
  }
  return "loose_macro_f1";
}

TuneResult tune_threshold_on_rankings(
    const Dataset &dev, const std::vector<std::vector<ScoredLabel>> &rankings,
    const std::vector<double> &grid, TuneObjective objective,
    const PredictionConfig &base) {
  if (grid.empty()) throw ConfigError("threshold grid is empty");
  for (size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1]))
      throw ConfigError("threshold grid must be strictly increasing");
  }
  if (rankings.size() != dev.instances.size())
    throw EvaluationError("rankings do not align with the dev instances");

  const std::vector<GoldSet> golds = golds_of(dev);
  TuneResult result;
  bool first = true;
  for (double t : grid) {
    PredictionConfig cfg = base;
    cfg.threshold = t;
    std::vector<PredictionSet> preds;
    preds.reserve(rankings.size());
    for (size_t i = 0; i < rankings.size(); ++i)
      preds.push_back(predict(dev.instances[i].id, rankings[i], cfg));
    double value = 0.0;
    switch (objective) {
      case TuneObjective::kLooseMacroF1:
        value = loose_macro(preds, golds).f1;
        break;
      case TuneObjective::kMicroF1:
        value = micro(preds, golds).f1;
        break;
      case TuneObjective::kStrictAccuracy:
        value = strict_accuracy(preds, golds);
        break;
    }
    result.grid.push_back({t, value});
    if (first || value >= result.value) {
      result.threshold = t;
      result.value = value;
      first = false;
    }
  }
  return result;
}

TuneResult tune_threshold(const Dataset &dev, const LabelVocabulary &vocab,
                          const EntailmentScorer &scorer,
                          const std::vector<double> &grid,
                          TuneObjective objective,
                          const PredictionConfig &base) {
  std::vector<std::vector<ScoredLabel>> rankings;
  rankings.reserve(dev.instances.size());
  for (const auto &inst : dev.instances)
    rankings.push_back(
        rank_all_candidates(inst, vocab, scorer, base.template_kind));
  return tune_threshold_on_rankings(dev, rankings, grid, objective, base);
}

std::vector<double> default_threshold_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 19; ++i) grid.push_back(i * 0.05);
  return grid;
}

json prediction_to_json(const PredictionSet &prediction, size_t topk) {
  json top = json::array();
  for (size_t i = 0; i < std::min(topk, prediction.ranking.size()); ++i) {
    top.push_back({{"label", prediction.ranking[i].label.raw},
                   {"score", prediction.ranking[i].score}});
  }
  return json{{"instance_id", prediction.instance_id},
              {"chosen", std::vector<std::string>(prediction.chosen.begin(),
                                                  prediction.chosen.end())},
              {"topk", std::move(top)}};
}

PredictionSet prediction_from_json(const json &record) {
  for (const char *key : {"instance_id", "chosen"}) {
    if (!record.contains(key))
      throw SchemaError(std::string("prediction record missing '") + key + "'");
  }
  PredictionSet p;
  p.instance_id = record["instance_id"].get<std::string>();
  for (const auto &l : record["chosen"]) p.chosen.insert(l.get<std::string>());
  if (record.contains("topk")) {
    for (const auto &entry : record["topk"]) {
      ScoredLabel s;
      s.label = parse_label(entry.at("label").get<std::string>());
      s.score = entry.at("score").get<double>();
      p.ranking.push_back(std::move(s));
    }
  }
  return p;
}

}  // namespace typent
