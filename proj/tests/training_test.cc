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

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracles.h"
#include "typent/errors.h"
#include "typent/inference.h"
#include "typent/scoring.h"
#include "typent/util.h"

namespace typent {
namespace {

MentionInstance instance(std::string id, std::string mention, LabelSet gold) {
  MentionInstance inst;
  inst.id = std::move(id);
  inst.mention = std::move(mention);
  inst.right_tokens = split_whitespace("was seen downtown .");
  inst.gold_labels = std::move(gold);
  return inst;
}

LabelVocabulary tiered_vocab() {
  TierPartition tiers{{"person", Tier::kGeneral},   {"location", Tier::kGeneral},
                      {"sportsman", Tier::kFine},   {"artist", Tier::kFine},
                      {"boxer", Tier::kUltrafine},  {"singer", Tier::kUltrafine},
                      {"organization", Tier::kGeneral}, {"city", Tier::kFine}};
  std::vector<std::string> raws;
  for (const auto &[raw, tier] : tiers) raws.push_back(raw);
  return LabelVocabulary(raws, tiers);
}

TEST_CASE("margin ranking loss examples") {
  CHECK(margin_ranking_loss(0.9, 0.3, 0.1) == 0.0);
  CHECK(margin_ranking_loss(0.4, 0.5, 0.1) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(margin_ranking_loss(0.5, 0.5, 0.1) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("margin ranking loss zero set and Lipschitz bound") {
  Rng rng(11);
  for (int i = 0; i < 5000; ++i) {
    const double pos = rng.uniform01(), neg = rng.uniform01();
    const double gamma = rng.uniform01() * 0.5;
    const double loss = margin_ranking_loss(pos, neg, gamma);
    CHECK(loss == oracle::ranking_loss_formula(pos, neg, gamma));
    CHECK((loss == 0.0) == oracle::exact_margin_met(pos, neg, gamma));
    const double h = (rng.uniform01() - 0.5) * 1e-3;
    CHECK(std::abs(margin_ranking_loss(pos + h, neg, gamma) - loss) <=
          std::abs(h) + 1e-15);
    CHECK(std::abs(margin_ranking_loss(pos, neg + h, gamma) - loss) <=
          std::abs(h) + 1e-15);
  }
}

TEST_CASE("config validation") {
  TrainingConfig c;
  CHECK_NOTHROW(c.validate());
  c.margin = -0.1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.dependency_weight = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.negatives_per_positive = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("example counts") {
  Rng rng(1);
  TrainingConfig config;

  auto tyson = instance("a", "Mike Tyson", {"person", "sportsman", "boxer"});
  auto ex = build_examples_for_instance(tyson, tiered_vocab(), config, rng);
  CHECK(std::count_if(ex.begin(), ex.end(),
                      [](auto &e) { return e.kind == PairKind::kType; }) == 3);
  CHECK(std::count_if(ex.begin(), ex.end(),
                      [](auto &e) { return e.kind == PairKind::kDependency; }) == 3);

  LabelVocabulary flat({"currency", "person", "city"});
  auto money = instance("b", "the euro", {"currency"});
  ex = build_examples_for_instance(money, flat, config, rng);
  CHECK(ex.size() == 1);
  CHECK(ex[0].kind == PairKind::kType);

  LabelVocabulary onto({"/location", "/location/city", "/person", "/organization"});
  auto london = instance("c", "London", {"/location/city"});
  ex = build_examples_for_instance(london, onto, config, rng);
  REQUIRE(ex.size() == 3);
  LabelSet positives;
  size_t deps = 0;
  for (const auto &e : ex) {
    if (e.kind == PairKind::kType) positives.insert(e.positive.label);
    else ++deps;
  }
  CHECK(positives == LabelSet{"/location", "/location/city"});
  CHECK(deps == 1);

  config.template_kind = TemplateKind::kSubstitution;
  ex = build_examples_for_instance(tyson, tiered_vocab(), config, rng);
  CHECK(ex.size() == 3);

  CHECK_THROWS_AS(build_examples_for_instance(instance("d", "x", {}), flat,
                                              TrainingConfig{}, rng),
                  ValidationError);
}

TEST_CASE("examples satisfy kind, premise and negative invariants") {
  Rng rng(2);
  TrainingConfig config;
  config.negatives_per_positive = 3;
  const auto vocab = tiered_vocab();
  const std::vector<LabelSet> golds = {{"person", "sportsman", "boxer"},
                                       {"person", "artist", "singer"},
                                       {"location", "city"},
                                       {"organization"}};
  for (int trial = 0; trial < 200; ++trial) {
    const LabelSet &gold = golds[trial % golds.size()];
    auto inst = instance("i" + std::to_string(trial), "Someone", gold);
    for (const auto &ex : build_examples_for_instance(inst, vocab, config, rng)) {
      CHECK(ex.positive.kind == ex.kind);
      CHECK(ex.negatives.size() == 3);
      for (const auto &neg : ex.negatives) {
        CHECK(neg.premise == ex.positive.premise);
        CHECK(neg.kind == ex.kind);
        CHECK(gold.count(neg.label) == 0);
      }
    }
  }
}

TEST_CASE("instance loss aggregation") {
  auto table = TableScorer(0.0);
  table.set("s", "pos", 0.8);
  table.set("s", "neg", 0.2);
  table.set("s", "tpos", 0.4);
  table.set("s", "tneg", 0.5);
  table.set("d", "dpos", 0.3);
  table.set("d", "dneg", 0.6);
  auto p = [](std::string prem, std::string hyp) {
    PremiseHypothesisPair x;
    x.premise = std::move(prem);
    x.hypothesis = std::move(hyp);
    return x;
  };
  TrainingConfig config;

  std::vector<RankedExample> easy = {{p("s", "pos"), {p("s", "neg")}, PairKind::kType}};
  auto r = instance_loss(easy, table, config);
  CHECK(r.type_loss == 0.0);
  CHECK(r.joint == 0.0);
  CHECK(r.dependency_examples == 0);

  std::vector<RankedExample> mixed = {
      {p("s", "tpos"), {p("s", "tneg")}, PairKind::kType},
      {p("d", "dpos"), {p("d", "dneg")}, PairKind::kDependency}};
  r = instance_loss(mixed, table, config);
  CHECK(r.type_loss == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(r.dependency_loss == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(r.joint == doctest::Approx(0.22).epsilon(1e-12));

  std::reverse(mixed.begin(), mixed.end());
  CHECK(instance_loss(mixed, table, config).joint == r.joint);

  config.dependency_weight = 0.0;
  CHECK(instance_loss(mixed, table, config).joint == r.type_loss);
}

TEST_CASE("instance loss is order invariant") {
  OverlapScorer overlap;
  Rng rng(9);
  TrainingConfig config;
  config.negatives_per_positive = 2;
  auto inst = instance("x", "Mike Tyson", {"person", "sportsman", "boxer"});
  auto ex = build_examples_for_instance(inst, tiered_vocab(), config, rng);
  const double base = instance_loss(ex, overlap, config).joint;
  for (int i = 0; i < 20; ++i) {
    rng.shuffle(ex);
    CHECK(instance_loss(ex, overlap, config).joint == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("tracker keeps the strict best") {
  BestCheckpointTracker tracker;
  int calls = 0;
  std::vector<std::string> tags = {"c1", "c2", "c3"};
  std::vector<double> f1 = {0.30, 0.45, 0.40};
  for (size_t i = 0; i < f1.size(); ++i)
    tracker.observe(f1[i], [&] { ++calls; return tags[i]; });
  CHECK(tracker.best_tag() == "c2");
  CHECK(tracker.best_f1() == 0.45);
  CHECK(calls == 2);
  CHECK_FALSE(tracker.observe(0.45, [] { return std::string("c4"); }));
}

Dataset dataset(std::string name, std::vector<MentionInstance> instances) {
  Dataset d;
  d.name = std::move(name);
  d.instances = std::move(instances);
  return d;
}

TEST_CASE("frozen dry run keeps the initial snapshot") {
  const auto vocab = tiered_vocab();
  auto train_set = dataset("train", {instance("t0", "Mike Tyson", {"person", "boxer"}),
                                     instance("t1", "Paris", {"location", "city"})});
  auto dev_set = dataset("dev", {instance("d0", "Ali", {"person", "boxer"})});
  FrozenTrainableScorer frozen(std::make_unique<OverlapScorer>());
  TrainingConfig config;
  config.max_epochs = 4;
  config.eval_every = 2;
  auto result = train(train_set, dev_set, vocab, frozen, config, PredictionConfig{});
  CHECK_FALSE(result.aborted);
  REQUIRE(result.log.size() == 3);
  CHECK(result.log[0].epoch == 0);
  CHECK(result.log[1].epoch == 2);
  CHECK(result.log[2].epoch == 4);
  CHECK(result.best_checkpoint == result.log[0].checkpoint);
  CHECK(result.best_checkpoint == "frozen-0");
  CHECK(result.log[1].checkpoint.empty());
  CHECK(result.log[1].type_loss.has_value());
  CHECK_FALSE(result.log[0].type_loss.has_value());

}

TEST_CASE("identical seeds give identical example streams and logs") {
  const auto vocab = tiered_vocab();
  std::vector<MentionInstance> insts;
  const std::vector<LabelSet> golds = {{"person", "sportsman", "boxer"},
                                       {"person", "artist", "singer"},
                                       {"location", "city"},
                                       {"organization"}};
  for (int i = 0; i < 12; ++i)
    insts.push_back(instance("t" + std::to_string(i), "Name" + std::to_string(i),
                             golds[i % golds.size()]));
  auto train_set = dataset("train", insts);
  auto dev_set = dataset("dev", {insts[0], insts[1]});
  TrainingConfig config;
  config.max_epochs = 3;
  config.eval_every = 1;
  config.batch_size = 5;
  config.seed = 77;

  auto run = [&](uint64_t seed) {
    config.seed = seed;
    std::vector<std::string> stream;
    TrainingHooks hooks;
    hooks.on_batch = [&](size_t epoch, std::span<const RankedExample> batch) {
      for (const auto &ex : batch) {
        std::string s = std::to_string(epoch) + "|" + ex.positive.hypothesis;
        for (const auto &n : ex.negatives) s += "|" + n.hypothesis;
        stream.push_back(s);
      }
    };
    LexicalScorer model(LexicalScorerOptions{.hash_bits = 12});
    auto result = train(train_set, dev_set, vocab, model, config, PredictionConfig{}, hooks);
    std::string log;
    for (const auto &r : result.log) log += r.to_json().dump() + "\n";
    return std::make_pair(stream, log);
  };
  auto a = run(77), b = run(77), c = run(78);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
  CHECK(a.first != c.first);
}

// Scores by a state advanced on every update. State 1 is the best on the dev
// fixture below, state 2 is worse than 1 but better than 0.
class ScriptedScorer : public TrainableScorer {
 public:
  double score(const PremiseHypothesisPair &pair) const override {
    static const std::map<std::string, std::vector<double>> table = {
        {"a", {0.9, 0.9, 0.9}}, {"b", {0.9, 0.1, 0.9}}, {"c", {0.9, 0.1, 0.1}}};
    auto it = table.find(pair.label);
    if (it == table.end()) return 0.0;
    return it->second[std::min<size_t>(state_, 2)];
  }
  std::string version_tag() const override { return "s" + std::to_string(state_); }
  double accumulate_ranking_loss(const PremiseHypothesisPair &,
                                 std::span<const PremiseHypothesisPair>, double,
                                 double) override {
    return 0.0;
  }
  void apply_update() override {
    if (fail_at_ && state_ + 1 == *fail_at_) throw std::runtime_error("device lost");
    ++state_;
  }
  std::string snapshot() override { return "s" + std::to_string(state_); }
  void restore(const std::string &tag) override { state_ = std::stoul(tag.substr(1)); }

  size_t state_ = 0;
  std::optional<size_t> fail_at_;
};

TEST_CASE("best dev checkpoint is restored") {
  LabelVocabulary vocab({"a", "b", "c"});
  auto train_set = dataset("train", {instance("t0", "x", {"a"})});
  auto dev_set = dataset("dev", {instance("d0", "y", {"a"})});
  TrainingConfig config;
  config.max_epochs = 2;
  config.eval_every = 1;
  config.batch_size = 100;

  ScriptedScorer scorer;
  auto result = train(train_set, dev_set, vocab, scorer, config, PredictionConfig{});
  REQUIRE(result.log.size() == 3);
  CHECK(result.log[0].dev_f1 == doctest::Approx(0.5));
  CHECK(result.log[1].dev_f1 == doctest::Approx(1.0));
  CHECK(result.log[2].dev_f1 == doctest::Approx(2.0 / 3.0));
  CHECK(result.best_checkpoint == "s1");
  CHECK(scorer.state_ == 1);
  CHECK(result.log[2].checkpoint.empty());
}

TEST_CASE("update failure aborts with the best checkpoint kept") {
  LabelVocabulary vocab({"a", "b", "c"});
  auto train_set = dataset("train", {instance("t0", "x", {"a"})});
  auto dev_set = dataset("dev", {instance("d0", "y", {"a"})});
  TrainingConfig config;
  config.max_epochs = 5;
  config.eval_every = 1;
  config.batch_size = 100;

  ScriptedScorer scorer;
  scorer.fail_at_ = 2;
  auto result = train(train_set, dev_set, vocab, scorer, config, PredictionConfig{});
  CHECK(result.aborted);
  CHECK(result.abort_reason.find("device lost") != std::string::npos);
  CHECK(result.best_checkpoint == "s1");
  CHECK(scorer.state_ == 1);
}

TEST_CASE("training rejects non-trainable setups") {
  LabelVocabulary vocab({"a", "b"});
  auto train_set = dataset("train", {instance("t0", "x", {"a"})});
  ScriptedScorer scorer;
  CHECK_THROWS_AS(train(dataset("e", {}), train_set, vocab, scorer, TrainingConfig{},
                        PredictionConfig{}),
                  TrainingError);
  TrainingConfig bad;
  bad.batch_size = 0;
  CHECK_THROWS_AS(train(train_set, train_set, vocab, scorer, bad, PredictionConfig{}),
                  ConfigError);
}

}  // namespace
}  // namespace typent
