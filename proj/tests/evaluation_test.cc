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

#include "doctest.h"
#include "oracles.h"
#include "typent/errors.h"
#include "typent/util.h"

namespace typent {
namespace {

PredictionSet pred(std::string id, LabelSet chosen) {
  PredictionSet p;
  p.instance_id = std::move(id);
  p.chosen = std::move(chosen);
  return p;
}

TEST_CASE("two-instance worked example") {
  std::vector<PredictionSet> preds = {pred("I1", {"a"}), pred("I2", {"c", "d"})};
  std::vector<GoldSet> golds = {{"I1", {"a", "b"}}, {"I2", {"c"}}};
  auto m = loose_macro(preds, golds);
  CHECK(m.precision == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(m.recall == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(m.f1 == doctest::Approx(0.75).epsilon(1e-12));
  auto mi = micro(preds, golds);
  CHECK(mi.precision == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(mi.recall == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(mi.f1 == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(strict_accuracy(preds, golds) == 0.0);
}

TEST_CASE("degenerate cases") {
  std::vector<GoldSet> golds = {{"x", {"a", "b"}}, {"y", {"c"}}};
  std::vector<PredictionSet> perfect = {pred("x", {"a", "b"}), pred("y", {"c"})};
  auto m = loose_macro(perfect, golds);
  CHECK(m.precision == 1.0);
  CHECK(m.recall == 1.0);
  CHECK(m.f1 == 1.0);
  CHECK(strict_accuracy(perfect, golds) == 1.0);

  std::vector<PredictionSet> disjoint = {pred("x", {"z"}), pred("y", {"a"})};
  m = loose_macro(disjoint, golds);
  CHECK(m.precision == 0.0);
  CHECK(m.recall == 0.0);
  CHECK(m.f1 == 0.0);

  std::vector<PredictionSet> empty = {pred("x", {}), pred("y", {})};
  auto mi = micro(empty, golds);
  CHECK(mi.precision == 0.0);
  CHECK(mi.recall == 0.0);
  CHECK(mi.f1 == 0.0);
  CHECK(loose_macro(empty, golds).precision == 0.0);

  std::vector<PredictionSet> one = {pred("x", {"a", "b"})};
  std::vector<GoldSet> one_gold = {golds[0]};
  mi = micro(one, one_gold);
  CHECK(mi.f1 == 1.0);

  std::vector<PredictionSet> half = {pred("x", {"a", "b"}), pred("y", {"c", "d"})};
  CHECK(strict_accuracy(half, golds) == 0.5);
  std::vector<PredictionSet> supersets = {pred("x", {"a", "b", "q"}),
                                          pred("y", {"c", "q"})};
  CHECK(strict_accuracy(supersets, golds) == 0.0);
}

TEST_CASE("alignment and gold validation") {
  std::vector<GoldSet> golds = {{"x", {"a"}}, {"y", {"b"}}};
  std::vector<PredictionSet> swapped = {pred("y", {"b"}), pred("x", {"a"})};
  try {
    loose_macro(swapped, golds);
    FAIL("expected an evaluation error");
  } catch (const EvaluationError &e) {
    CHECK(std::string(e.what()).find("'y'") != std::string::npos);
  }
  std::vector<PredictionSet> short_list = {pred("x", {"a"})};
  CHECK_THROWS_AS(micro(short_list, golds), EvaluationError);
  std::vector<GoldSet> empty_gold = {{"x", {}}};
  CHECK_THROWS_AS(strict_accuracy(short_list, empty_gold), EvaluationError);
}

struct Fixture {
  std::vector<PredictionSet> preds;
  std::vector<GoldSet> golds;
  std::vector<uint32_t> chosen_masks, gold_masks;
};

Fixture random_fixture(Rng &rng, size_t n, int n_labels, bool single = false) {
  Fixture f;
  for (size_t i = 0; i < n; ++i) {
    uint32_t c = 0, g = 0;
    if (single) {
      c = 1u << rng.uniform_index(n_labels);
      g = 1u << rng.uniform_index(n_labels);
    } else {
      c = static_cast<uint32_t>(rng.uniform_index(1u << n_labels));
      while (g == 0) g = static_cast<uint32_t>(rng.uniform_index(1u << n_labels));
    }
    LabelSet cs, gs;
    for (int l = 0; l < n_labels; ++l) {
      if ((c >> l) & 1u) cs.insert("L" + std::to_string(l));
      if ((g >> l) & 1u) gs.insert("L" + std::to_string(l));
    }
    const std::string id = "i" + std::to_string(i);
    f.preds.push_back(pred(id, cs));
    f.golds.push_back({id, gs});
    f.chosen_masks.push_back(c);
    f.gold_masks.push_back(g);
  }
  return f;
}

TEST_CASE("metrics agree with the brute force oracle") {
  Rng rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const int n_labels = 1 + static_cast<int>(rng.uniform_index(8));
    auto f = random_fixture(rng, 1 + rng.uniform_index(10), n_labels);
    auto expect = oracle::brute_force_metrics(f.chosen_masks, f.gold_masks, n_labels);
    auto m = loose_macro(f.preds, f.golds);
    auto mi = micro(f.preds, f.golds);
    CHECK(std::abs(m.precision - expect.p_macro) <= 1e-12);
    CHECK(std::abs(m.recall - expect.r_macro) <= 1e-12);
    CHECK(std::abs(m.f1 - expect.f_macro) <= 1e-12);
    CHECK(std::abs(mi.precision - expect.p_micro) <= 1e-12);
    CHECK(std::abs(mi.recall - expect.r_micro) <= 1e-12);
    CHECK(std::abs(mi.f1 - expect.f_micro) <= 1e-12);
    CHECK(m.f1 <= std::max(m.precision, m.recall) + 1e-15);
  }
}

TEST_CASE("single-label micro equals macro") {
  Rng rng(32);
  for (int trial = 0; trial < 200; ++trial) {
    auto f = random_fixture(rng, 1 + rng.uniform_index(15), 5, true);
    CHECK(micro(f.preds, f.golds).f1 ==
          doctest::Approx(loose_macro(f.preds, f.golds).f1).epsilon(1e-12));
  }
}

TEST_CASE("metrics are permutation invariant") {
  Rng rng(33);
  for (int trial = 0; trial < 100; ++trial) {
    auto f = random_fixture(rng, 2 + rng.uniform_index(9), 6);
    const auto base = evaluate(f.preds, f.golds).to_json().dump();
    std::vector<size_t> perm(f.preds.size());
    for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    rng.shuffle(perm);
    std::vector<PredictionSet> p2;
    std::vector<GoldSet> g2;
    for (size_t i : perm) {
      p2.push_back(f.preds[i]);
      g2.push_back(f.golds[i]);
    }
    auto a = evaluate(f.preds, f.golds), b = evaluate(p2, g2);
    CHECK(a.loose_macro.f1 == doctest::Approx(b.loose_macro.f1).epsilon(1e-12));
    CHECK(a.micro.f1 == doctest::Approx(b.micro.f1).epsilon(1e-12));
    CHECK(a.strict_accuracy == doctest::Approx(b.strict_accuracy).epsilon(1e-12));
  }
}

TEST_CASE("adding a correct label never lowers recall") {
  Rng rng(34);
  for (int trial = 0; trial < 100; ++trial) {
    auto f = random_fixture(rng, 1 + rng.uniform_index(8), 6);
    const double before = micro(f.preds, f.golds).recall;
    const double inst_before = loose_macro(f.preds, f.golds).recall;
    const size_t i = rng.uniform_index(f.preds.size());
    f.preds[i].chosen.insert(*f.golds[i].labels.begin());
    CHECK(micro(f.preds, f.golds).recall >= before);
    CHECK(loose_macro(f.preds, f.golds).recall >= inst_before);
  }
}

TEST_CASE("bucket report matches naive restrict-then-score") {
  Rng rng(35);
  const int n_labels = 8;
  auto f = random_fixture(rng, 30, n_labels);
  std::vector<LabelBucket> buckets(3);
  for (int l = 0; l < n_labels; ++l)
    buckets[l % 3].labels.insert("L" + std::to_string(l));
  buckets[0].lower = 0;
  buckets[0].upper = 1;
  buckets[1].lower = 1;
  buckets[1].upper = 3;
  buckets[2].lower = 3;
  auto report = bucket_report(f.preds, f.golds, buckets);

  std::vector<std::set<std::string>> chosen, gold;
  for (size_t i = 0; i < f.preds.size(); ++i) {
    chosen.push_back(f.preds[i].chosen);
    gold.push_back(f.golds[i].labels);
  }
  size_t idx = 0;
  for (const auto &bucket : buckets) {
    auto expect = oracle::naive_restricted_macro(chosen, gold, bucket.labels);
    if (expect.n == 0) continue;
    REQUIRE(idx < report.size());
    const auto &got = report[idx++];
    CHECK(got.bucket == bucket.name());
    CHECK(got.n_instances == static_cast<size_t>(expect.n));
    CHECK(got.label_count == bucket.labels.size());
    CHECK(std::abs(got.prf.precision - expect.p) <= 1e-12);
    CHECK(std::abs(got.prf.recall - expect.r) <= 1e-12);
    CHECK(std::abs(got.prf.f1 - expect.f) <= 1e-12);
  }
  CHECK(idx == report.size());
}

TEST_CASE("bucket edge cases") {
  std::vector<PredictionSet> preds = {pred("x", {"a"}), pred("y", {"b", "c"})};
  std::vector<GoldSet> golds = {{"x", {"a", "b"}}, {"y", {"c"}}};
  LabelBucket all;
  all.labels = {"a", "b", "c", "d"};
  LabelBucket none;
  none.lower = 5;
  none.labels = {"d"};
  std::vector<LabelBucket> buckets = {all, none};
  auto report = bucket_report(preds, golds, buckets);
  REQUIRE(report.size() == 1);
  const auto global = loose_macro(preds, golds);
  CHECK(report[0].prf.f1 == global.f1);
  CHECK(report[0].prf.precision == global.precision);
}

TEST_CASE("report rendering") {
  std::vector<PredictionSet> preds = {pred("I1", {"a"}), pred("I2", {"c", "d"})};
  std::vector<GoldSet> golds = {{"I1", {"a", "b"}}, {"I2", {"c"}}};
  auto report = evaluate(preds, golds);
  auto j = report.to_json();
  CHECK(j["n_instances"] == 2);
  CHECK(j["loose_macro"]["f1"].get<double>() == doctest::Approx(0.75));
  CHECK(j["micro"]["p"].get<double>() == doctest::Approx(2.0 / 3));
  CHECK(j.contains("strict_accuracy"));
  CHECK(report.to_table().find("loose-macro") != std::string::npos);
}

}  // namespace
}  // namespace typent
