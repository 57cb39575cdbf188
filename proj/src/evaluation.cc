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

#include "typent/evaluation.h"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "typent/errors.h"

namespace typent {

using nlohmann::json;

std::vector<GoldSet> golds_of(const Dataset &dataset) {
  std::vector<GoldSet> out;
  out.reserve(dataset.instances.size());
  for (const auto &inst : dataset.instances)
    out.push_back({inst.id, inst.gold_labels});
  return out;
}

PRF PRF::from(double precision, double recall) {
  PRF out{precision, recall, 0.0};
  if (precision + recall > 0.0)
    out.f1 = 2.0 * precision * recall / (precision + recall);
  return out;
}

namespace {

void check_aligned(std::span<const PredictionSet> preds,
                   std::span<const GoldSet> golds) {
  if (preds.size() != golds.size()) {
    throw EvaluationError(std::to_string(preds.size()) + " predictions for " +
                          std::to_string(golds.size()) + " gold instances");
  }
  for (size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].instance_id != golds[i].instance_id) {
      throw EvaluationError("prediction id '" + preds[i].instance_id +
                            "' does not match gold id '" +
                            golds[i].instance_id + "' at position " +
                            std::to_string(i));
    }
    if (golds[i].labels.empty()) {
      throw EvaluationError("instance '" + golds[i].instance_id +
                            "' has an empty gold set");
    }
  }
}

size_t intersection_size(const LabelSet &a, const LabelSet &b) {
  size_t n = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++n;
      ++ia;
      ++ib;
    }
  }
  return n;
}

}  // namespace

PRF loose_macro(std::span<const PredictionSet> preds,
                std::span<const GoldSet> golds) {
  check_aligned(preds, golds);
  if (preds.empty()) return {};
  double p_sum = 0.0, r_sum = 0.0;
  for (size_t i = 0; i < preds.size(); ++i) {
    const double hit = static_cast<double>(
        intersection_size(preds[i].chosen, golds[i].labels));
    if (!preds[i].chosen.empty())
      p_sum += hit / static_cast<double>(preds[i].chosen.size());
    r_sum += hit / static_cast<double>(golds[i].labels.size());
  }
  const double n = static_cast<double>(preds.size());
  return PRF::from(p_sum / n, r_sum / n);
}

PRF micro(std::span<const PredictionSet> preds,
          std::span<const GoldSet> golds) {
  check_aligned(preds, golds);
  size_t hit = 0, chosen = 0, gold = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    hit += intersection_size(preds[i].chosen, golds[i].labels);
    chosen += preds[i].chosen.size();
    gold += golds[i].labels.size();
  }
  const double p = chosen ? static_cast<double>(hit) / chosen : 0.0;
  const double r = gold ? static_cast<double>(hit) / gold : 0.0;
  return PRF::from(p, r);
}

double strict_accuracy(std::span<const PredictionSet> preds,
                       std::span<const GoldSet> golds) {
  check_aligned(preds, golds);
  if (preds.empty()) return 0.0;
  size_t exact = 0;
  for (size_t i = 0; i < preds.size(); ++i)
    if (preds[i].chosen == golds[i].labels) ++exact;
  return static_cast<double>(exact) / static_cast<double>(preds.size());
}

std::vector<BucketScore> bucket_report(std::span<const PredictionSet> preds,
                                       std::span<const GoldSet> golds,
                                       std::span<const LabelBucket> buckets) {
  check_aligned(preds, golds);
  std::vector<BucketScore> out;
  for (const auto &bucket : buckets) {
    std::vector<PredictionSet> rp;
    std::vector<GoldSet> rg;
    for (size_t i = 0; i < preds.size(); ++i) {
      GoldSet g{golds[i].instance_id, {}};
      for (const auto &l : golds[i].labels)
        if (bucket.labels.count(l)) g.labels.insert(l);
      if (g.labels.empty()) continue;
      PredictionSet p;
      p.instance_id = preds[i].instance_id;
      for (const auto &l : preds[i].chosen)
        if (bucket.labels.count(l)) p.chosen.insert(l);
      rp.push_back(std::move(p));
      rg.push_back(std::move(g));
    }
    if (rg.empty()) continue;
    out.push_back({bucket.name(), loose_macro(rp, rg), bucket.labels.size(),
                   rg.size()});
  }
  return out;
}

EvaluationReport evaluate(std::span<const PredictionSet> preds,
                          std::span<const GoldSet> golds,
                          std::span<const LabelBucket> buckets) {
  EvaluationReport report;
  report.loose_macro = loose_macro(preds, golds);
  report.micro = micro(preds, golds);
  report.strict_accuracy = strict_accuracy(preds, golds);
  report.per_bucket = bucket_report(preds, golds, buckets);
  report.n_instances = preds.size();
  return report;
}

namespace {

json prf_json(const PRF &m) {
  return json{{"p", m.precision}, {"r", m.recall}, {"f1", m.f1}};
}

}  // namespace

json EvaluationReport::to_json() const {
  json buckets = json::array();
  for (const auto &b : per_bucket) {
    json entry = prf_json(b.prf);
    entry["bucket"] = b.bucket;
    entry["label_count"] = b.label_count;
    entry["n_instances"] = b.n_instances;
    buckets.push_back(std::move(entry));
  }
  return json{{"loose_macro", prf_json(loose_macro)},
              {"micro", prf_json(micro)},
              {"strict_accuracy", strict_accuracy},
              {"per_bucket", std::move(buckets)},
              {"n_instances", n_instances}};
}

std::string EvaluationReport::to_table() const {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-16s %8s %8s %8s\n", "metric", "P", "R",
                "F1");
  out << line;
  auto row = [&](const std::string &name, const PRF &m) {
    std::snprintf(line, sizeof(line), "%-16s %8.4f %8.4f %8.4f\n",
                  name.c_str(), m.precision, m.recall, m.f1);
    out << line;
  };
  row("loose-macro", loose_macro);
  row("micro", micro);
  std::snprintf(line, sizeof(line), "%-16s %8.4f\n", "strict-accuracy",
                strict_accuracy);
  out << line;
  std::snprintf(line, sizeof(line), "%-16s %8zu\n", "instances", n_instances);
  out << line;
  if (!per_bucket.empty()) {
    std::snprintf(line, sizeof(line), "\n%-16s %8s %8s %8s %8s %8s\n",
                  "bucket", "P", "R", "F1", "labels", "inst");
    out << line;
    for (const auto &b : per_bucket) {
      std::snprintf(line, sizeof(line),
                    "%-16s %8.4f %8.4f %8.4f %8zu %8zu\n", b.bucket.c_str(),
                    b.prf.precision, b.prf.recall, b.prf.f1, b.label_count,
                    b.n_instances);
      out << line;
    }
  }
  return out.str();
}

}  // namespace typent
