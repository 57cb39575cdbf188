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

#ifndef TYPENT_EVALUATION_H_
#define TYPENT_EVALUATION_H_

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "typent/corpus.h"
#include "typent/inference.h"

namespace typent {

struct GoldSet {
  std::string instance_id;
  LabelSet labels;
};

std::vector<GoldSet> golds_of(const Dataset &dataset);

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  // Harmonic mean, 0 when both are 0.
  static PRF from(double precision, double recall);
};

// Loose macro: per-instance set precision and recall averaged over instances,
// F1 the harmonic mean of the two averages. Empty predictions contribute
// precision 0. Throws EvaluationError on misaligned ids or empty gold sets.
PRF loose_macro(std::span<const PredictionSet> preds,
                std::span<const GoldSet> golds);

// Totals of |chosen & gold| over totals of |chosen| and |gold|.
PRF micro(std::span<const PredictionSet> preds, std::span<const GoldSet> golds);

// Share of instances whose chosen set equals the gold set.
double strict_accuracy(std::span<const PredictionSet> preds,
                       std::span<const GoldSet> golds);

struct BucketScore {
  std::string bucket;
  PRF prf;
  size_t label_count = 0;
  size_t n_instances = 0;
};

// Loose macro restricted to each bucket's labels. Instances without gold
// labels in a bucket are dropped; buckets left without instances are omitted.
std::vector<BucketScore> bucket_report(std::span<const PredictionSet> preds,
                                       std::span<const GoldSet> golds,
                                       std::span<const LabelBucket> buckets);

struct EvaluationReport {
  PRF loose_macro;
  PRF micro;
  double strict_accuracy = 0.0;
  std::vector<BucketScore> per_bucket;
  size_t n_instances = 0;

  nlohmann::json to_json() const;
  std::string to_table() const;
};

EvaluationReport evaluate(std::span<const PredictionSet> preds,
                          std::span<const GoldSet> golds,
                          std::span<const LabelBucket> buckets = {});

}  // namespace typent

#endif  // TYPENT_EVALUATION_H_
