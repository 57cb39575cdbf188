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

#ifndef TYPENT_CORPUS_H_
#define TYPENT_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace typent {

using LabelSet = std::set<std::string>;

enum class Split { kTrain, kDev, kTest };

std::string_view split_name(Split split);
Split parse_split(std::string_view name);

// One entity mention in context with its gold label set.
struct MentionInstance {
  std::string id;
  std::vector<std::string> left_tokens;
  std::string mention;
  std::vector<std::string> right_tokens;
  LabelSet gold_labels;

  // Keys of the source JSON object that are not part of the schema. They are
  // carried through re-serialization untouched.
  nlohmann::json extra = nlohmann::json::object();
};

struct Dataset {
  std::string name;
  Split split = Split::kTrain;
  std::vector<MentionInstance> instances;

  // Union of the gold sets of all instances.
  LabelSet label_set() const;
};

// Reads UFET-style JSONL. Each line must carry left_context_token,
// mention_span, right_context_token and y_str. An instance id is taken from
// "id" or "annot_id" when present, otherwise "<name>:<line>" is synthesized.
// Empty y_str is only accepted on the test split.
Dataset load_ufet_jsonl(const std::filesystem::path &path, std::string name,
                        Split split);
Dataset parse_ufet_jsonl(std::istream &in, std::string name, Split split);

nlohmann::json instance_to_json(const MentionInstance &instance);
std::string dataset_to_jsonl(const Dataset &dataset);

// Tokens joined by single spaces with the mention in its layout position.
std::string render_premise(const MentionInstance &instance);

// Byte offset of the mention inside render_premise(instance).
size_t mention_offset(const MentionInstance &instance);

struct FewShotSplitSpec {
  double target_unseen_fraction = 0.4;
  uint64_t seed = 0;
};

struct FewShotSplit {
  Dataset filtered_train;
  LabelSet heldout_labels;
};

// Holds out a random subset of the test label set and strips it from the
// training gold sets. Instances left without labels are dropped.
FewShotSplit make_fewshot_split(const Dataset &train, const Dataset &test,
                                const FewShotSplitSpec &spec);

nlohmann::json fewshot_manifest(const FewShotSplit &split,
                                const FewShotSplitSpec &spec);

// Occurrence-count bucket [lower, upper); upper is unset for the last one.
struct LabelBucket {
  size_t lower = 0;
  std::optional<size_t> upper;
  LabelSet labels;

  std::string name() const;
  bool contains(size_t count) const {
    return count >= lower && (!upper || count < *upper);
  }
};

// Assigns every label of the test set to the bucket of its training count.
// bucket_edges must be strictly increasing and start at 0.
std::vector<LabelBucket> frequency_buckets(
    const Dataset &train, const Dataset &test,
    const std::vector<size_t> &bucket_edges);

}  // namespace typent

#endif  // TYPENT_CORPUS_H_
