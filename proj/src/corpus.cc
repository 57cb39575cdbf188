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

#include "typent/corpus.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "typent/errors.h"
#include "typent/util.h"

namespace typent {

using nlohmann::json;

namespace {

constexpr const char *kLeftKey = "left_context_token";
constexpr const char *kMentionKey = "mention_span";
constexpr const char *kRightKey = "right_context_token";
constexpr const char *kLabelsKey = "y_str";

const json &require(const json &obj, const char *key, size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw SchemaError("line " + std::to_string(line_no) + ": missing key '" +
                      key + "'");
  }
  return *it;
}

std::vector<std::string> string_array(const json &value, const char *key,
                                      size_t line_no) {
  if (!value.is_array()) {
    throw SchemaError("line " + std::to_string(line_no) + ": key '" + key +
                      "' must be an array of strings");
  }
  std::vector<std::string> out;
  out.reserve(value.size());
  for (const json &v : value) {
    if (!v.is_string()) {
      throw SchemaError("line " + std::to_string(line_no) + ": key '" + key +
                        "' must be an array of strings");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

std::string_view split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "dev") return Split::kDev;
  if (name == "test") return Split::kTest;
  throw ConfigError("unknown split '" + std::string(name) + "'");
}

LabelSet Dataset::label_set() const {
  LabelSet out;
  for (const auto &inst : instances)
    out.insert(inst.gold_labels.begin(), inst.gold_labels.end());
  return out;
}

Dataset parse_ufet_jsonl(std::istream &in, std::string name, Split split) {
  Dataset ds;
  ds.name = std::move(name);
  ds.split = split;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error &e) {
      throw LoadError("line " + std::to_string(line_no) +
                      ": malformed JSON: " + e.what());
    }
    if (!obj.is_object()) {
      throw LoadError("line " + std::to_string(line_no) +
                      ": expected a JSON object");
    }

    MentionInstance inst;
    inst.left_tokens = string_array(require(obj, kLeftKey, line_no), kLeftKey,
                                    line_no);
    const json &mention = require(obj, kMentionKey, line_no);
    if (!mention.is_string()) {
      throw SchemaError("line " + std::to_string(line_no) + ": key '" +
                        kMentionKey + "' must be a string");
    }
    inst.mention = mention.get<std::string>();
    inst.right_tokens = string_array(require(obj, kRightKey, line_no),
                                     kRightKey, line_no);
    auto labels = string_array(require(obj, kLabelsKey, line_no), kLabelsKey,
                               line_no);
    inst.gold_labels = LabelSet(labels.begin(), labels.end());

    if (auto it = obj.find("id"); it != obj.end() && it->is_string()) {
      inst.id = it->get<std::string>();
    } else if (auto it2 = obj.find("annot_id");
               it2 != obj.end() && it2->is_string()) {
      inst.id = it2->get<std::string>();
    } else {
      inst.id = ds.name + ":" + std::to_string(line_no);
    }

    for (auto it = obj.begin(); it != obj.end(); ++it) {
      const std::string &key = it.key();
      if (key == kLeftKey || key == kMentionKey || key == kRightKey ||
          key == kLabelsKey || key == "id")
        continue;
      inst.extra[key] = it.value();
    }

    if (inst.mention.empty()) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": empty mention_span");
    }
    if (inst.mention.find('\n') != std::string::npos) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": mention_span contains a newline");
    }
    if (inst.gold_labels.empty() && split != Split::kTest) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": empty y_str on " +
                            std::string(split_name(split)) + " split");
    }
    if (!seen_ids.insert(inst.id).second) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": duplicate instance id '" + inst.id + "'");
    }
    ds.instances.push_back(std::move(inst));
  }
  return ds;
}

Dataset load_ufet_jsonl(const std::filesystem::path &path, std::string name,
                        Split split) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  return parse_ufet_jsonl(in, std::move(name), split);
}

json instance_to_json(const MentionInstance &instance) {
  json obj = instance.extra.is_object() ? instance.extra : json::object();
  obj["id"] = instance.id;
  obj[kLeftKey] = instance.left_tokens;
  obj[kMentionKey] = instance.mention;
  obj[kRightKey] = instance.right_tokens;
  obj[kLabelsKey] = std::vector<std::string>(instance.gold_labels.begin(),
                                             instance.gold_labels.end());
  return obj;
}

std::string dataset_to_jsonl(const Dataset &dataset) {
  std::string out;
  for (const auto &inst : dataset.instances) {
    out += instance_to_json(inst).dump();
    out += '\n';
  }
  return out;
}

std::string render_premise(const MentionInstance &instance) {
  std::string out = join(instance.left_tokens, " ");
  if (!out.empty()) out += ' ';
  out += instance.mention;
  if (!instance.right_tokens.empty()) {
    out += ' ';
    out += join(instance.right_tokens, " ");
  }
  return out;
}

size_t mention_offset(const MentionInstance &instance) {
  if (instance.left_tokens.empty()) return 0;
  return join(instance.left_tokens, " ").size() + 1;
}

FewShotSplit make_fewshot_split(const Dataset &train, const Dataset &test,
                                const FewShotSplitSpec &spec) {
  if (!(spec.target_unseen_fraction >= 0.0 &&
        spec.target_unseen_fraction <= 1.0)) {
    throw SplitError("target_unseen_fraction must lie in [0, 1]");
  }
  if (train.instances.empty() || test.instances.empty()) {
    throw SplitError("train and test datasets must be nonempty");
  }

  const LabelSet test_labels = test.label_set();
  const std::vector<std::string> candidates(test_labels.begin(),
                                            test_labels.end());
  const size_t n_test = candidates.size();
  const size_t n_heldout = static_cast<size_t>(
      std::llround(spec.target_unseen_fraction * static_cast<double>(n_test)));

  // Training survives any held-out choice if some instance carries a label
  // outside the test label set; otherwise one test label must stay.
  bool has_outside_label = false;
  LabelSet train_test_labels;
  for (const auto &inst : train.instances) {
    for (const auto &l : inst.gold_labels) {
      if (test_labels.count(l))
        train_test_labels.insert(l);
      else
        has_outside_label = true;
    }
  }
  const size_t max_heldout = has_outside_label || train_test_labels.empty()
                                 ? n_test
                                 : n_test - 1;
  if (n_heldout > max_heldout) {
    std::ostringstream msg;
    msg << "holding out " << n_heldout << " of " << n_test
        << " test labels would empty the training set; achievable maximum is "
        << max_heldout << " labels (fraction "
        << (n_test ? static_cast<double>(max_heldout) / n_test : 0.0) << ")";
    throw SplitError(msg.str());
  }

  Rng rng = Rng::substream(spec.seed, "split");
  auto draw = [&](const std::vector<std::string> &pool, size_t n) {
    std::vector<std::string> shuffled = pool;
    rng.shuffle(shuffled);
    return LabelSet(shuffled.begin(), shuffled.begin() + n);
  };
  auto keeps_training = [&](const LabelSet &heldout) {
    for (const auto &inst : train.instances)
      for (const auto &l : inst.gold_labels)
        if (!heldout.count(l)) return true;
    return false;
  };

  LabelSet heldout = draw(candidates, n_heldout);
  if (!keeps_training(heldout)) {
    // Pin one label that keeps a training instance alive, then draw the
    // held-out set from the rest.
    std::vector<std::string> keepable(train_test_labels.begin(),
                                      train_test_labels.end());
    const std::string pinned = keepable[rng.uniform_index(keepable.size())];
    std::vector<std::string> rest;
    for (const auto &l : candidates)
      if (l != pinned) rest.push_back(l);
    heldout = draw(rest, n_heldout);
  }

  FewShotSplit result;
  result.heldout_labels = std::move(heldout);
  result.filtered_train.name = train.name;
  result.filtered_train.split = train.split;
  for (const auto &inst : train.instances) {
    MentionInstance copy = inst;
    for (const auto &l : result.heldout_labels) copy.gold_labels.erase(l);
    if (!copy.gold_labels.empty())
      result.filtered_train.instances.push_back(std::move(copy));
  }
  return result;
}

json fewshot_manifest(const FewShotSplit &split, const FewShotSplitSpec &spec) {
  return json{{"heldout_labels",
               std::vector<std::string>(split.heldout_labels.begin(),
                                        split.heldout_labels.end())},
              {"seed", spec.seed},
              {"fraction", spec.target_unseen_fraction}};
}

std::string LabelBucket::name() const {
  return "[" + std::to_string(lower) + "," +
         (upper ? std::to_string(*upper) : std::string("inf")) + ")";
}

std::vector<LabelBucket> frequency_buckets(
    const Dataset &train, const Dataset &test,
    const std::vector<size_t> &bucket_edges) {
  if (bucket_edges.empty() || bucket_edges.front() != 0) {
    throw std::invalid_argument("bucket edges must start at 0");
  }
  for (size_t i = 1; i < bucket_edges.size(); ++i) {
    if (bucket_edges[i] <= bucket_edges[i - 1])
      throw std::invalid_argument("bucket edges must be strictly increasing");
  }

  std::vector<LabelBucket> buckets(bucket_edges.size());
  for (size_t i = 0; i < bucket_edges.size(); ++i) {
    buckets[i].lower = bucket_edges[i];
    if (i + 1 < bucket_edges.size()) buckets[i].upper = bucket_edges[i + 1];
  }

  std::map<std::string, size_t> train_counts;
  for (const auto &inst : train.instances)
    for (const auto &l : inst.gold_labels) ++train_counts[l];

  for (const auto &label : test.label_set()) {
    auto it = train_counts.find(label);
    const size_t count = it == train_counts.end() ? 0 : it->second;
    // Last edge not greater than the count.
    auto pos = std::upper_bound(bucket_edges.begin(), bucket_edges.end(), count);
    buckets[static_cast<size_t>(pos - bucket_edges.begin()) - 1].labels.insert(
        label);
  }
  return buckets;
}

}  // namespace typent
