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

#ifndef TYPENT_INFERENCE_H_
#define TYPENT_INFERENCE_H_

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "typent/corpus.h"
#include "typent/labelspace.h"
#include "typent/templates.h"

namespace typent {

class EntailmentScorer;

enum class FallbackKind { kTop1, kOtherLabel, kEmpty };

struct Fallback {
  FallbackKind kind = FallbackKind::kTop1;
  std::string other_label;  // only for kOtherLabel

  static Fallback top1() { return {}; }
  static Fallback other(std::string label) {
    return {FallbackKind::kOtherLabel, std::move(label)};
  }
  static Fallback none() { return {FallbackKind::kEmpty, {}}; }

  // "top1", "empty" or "other:LABEL".
  static Fallback parse(std::string_view text);
  std::string to_string() const;
};

struct PredictionConfig {
  double threshold = 0.5;
  Fallback fallback;
  TemplateKind template_kind = TemplateKind::kTaxonomic;
};

struct ScoredLabel {
  TypeLabel label;
  double score = 0.0;
  // Set when the hypothesis could not be rendered; such labels score 0.
  bool render_failed = false;
};

struct PredictionSet {
  std::string instance_id;
  LabelSet chosen;
  std::vector<ScoredLabel> ranking;
};

// Descending score, ties by ascending raw label.
void sort_ranking(std::vector<ScoredLabel> &ranking);

// Scores the hypothesis of every vocabulary label in one batch and sorts.
std::vector<ScoredLabel> rank_all_candidates(const MentionInstance &instance,
                                             const LabelVocabulary &vocab,
                                             const EntailmentScorer &scorer,
                                             TemplateKind template_kind);

// Labels scoring at least the threshold; the fallback applies when none do.
PredictionSet predict(std::string instance_id,
                      std::vector<ScoredLabel> ranking,
                      const PredictionConfig &config);

// Threshold filter without fallback.
LabelSet labels_above(const std::vector<ScoredLabel> &ranking,
                      double threshold);

enum class TuneObjective { kLooseMacroF1, kMicroF1, kStrictAccuracy };

TuneObjective parse_objective(std::string_view name);
std::string_view objective_name(TuneObjective objective);

struct GridPoint {
  double threshold = 0.0;
  double value = 0.0;
};

struct TuneResult {
  double threshold = 0.0;
  double value = 0.0;
  std::vector<GridPoint> grid;
};

// Picks the grid threshold maximizing the objective over pre-scored rankings;
// ties go to the larger threshold. `rankings` aligns with `dev.instances`.
TuneResult tune_threshold_on_rankings(
    const Dataset &dev, const std::vector<std::vector<ScoredLabel>> &rankings,
    const std::vector<double> &grid, TuneObjective objective,
    const PredictionConfig &base);

// Scores every dev instance once, then sweeps the grid.
TuneResult tune_threshold(const Dataset &dev, const LabelVocabulary &vocab,
                          const EntailmentScorer &scorer,
                          const std::vector<double> &grid,
                          TuneObjective objective,
                          const PredictionConfig &base);

// 0.05, 0.10, ..., 0.95.
std::vector<double> default_threshold_grid();

// {instance_id, chosen, topk: [{label, score}]}
nlohmann::json prediction_to_json(const PredictionSet &prediction,
                                  size_t topk);
PredictionSet prediction_from_json(const nlohmann::json &record);

}  // namespace typent

#endif  // TYPENT_INFERENCE_H_
