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

#ifndef TYPENT_LABELSPACE_H_
#define TYPENT_LABELSPACE_H_

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "typent/corpus.h"
#include "typent/util.h"

namespace typent {

// Specificity tier. The numeric order is the specificity order: a label may
// only act as the descendant of a label with a larger tier value.
enum class Tier { kUltrafine = 0, kFine = 1, kGeneral = 2, kUnspecified = 3 };

std::string_view tier_name(Tier tier);
Tier parse_tier(std::string_view name);

using TierPartition = std::map<std::string, Tier>;

struct TypeLabel {
  std::string raw;
  std::vector<std::string> segments;
  Tier tier = Tier::kUnspecified;
  // Last segment with underscores replaced by spaces; used in templates.
  std::string surface;

  bool hierarchical() const { return !raw.empty() && raw.front() == '/'; }

  friend bool operator==(const TypeLabel &, const TypeLabel &) = default;
};

// Parses "/location/transit/bridge" into path segments, or a free-form label
// into a single segment. Throws ParseError for labels made only of '/'.
TypeLabel parse_label(std::string_view raw,
                      const TierPartition *tiers = nullptr);

class LabelVocabulary {
 public:
  LabelVocabulary() = default;
  explicit LabelVocabulary(const std::vector<std::string> &raws,
                           std::optional<TierPartition> tiers = std::nullopt);

  // Plain text, one label per line; optional "label<TAB>tier" file.
  static LabelVocabulary load(const std::filesystem::path &vocab_path,
                              const std::filesystem::path &tier_path = {});

  // Labels sorted by raw string.
  const std::vector<TypeLabel> &labels() const { return labels_; }
  size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }

  const TypeLabel *find(std::string_view raw) const;
  bool contains(std::string_view raw) const { return find(raw) != nullptr; }

  // Vocabulary member if present, otherwise a label synthesized from raw
  // (used for implicit ontology ancestors).
  TypeLabel resolve(std::string_view raw) const;

  bool has_ontology() const { return has_ontology_; }
  const std::optional<TierPartition> &tier_partition() const { return tiers_; }

 private:
  std::vector<TypeLabel> labels_;
  std::unordered_map<std::string, size_t> index_;
  bool has_ontology_ = false;
  std::optional<TierPartition> tiers_;
};

struct DependencyPair {
  TypeLabel descendant;
  TypeLabel ancestor;

  friend bool operator<(const DependencyPair &a, const DependencyPair &b) {
    if (a.descendant.raw != b.descendant.raw)
      return a.descendant.raw < b.descendant.raw;
    return a.ancestor.raw < b.ancestor.raw;
  }
  friend bool operator==(const DependencyPair &a, const DependencyPair &b) {
    return a.descendant.raw == b.descendant.raw &&
           a.ancestor.raw == b.ancestor.raw;
  }
};

// Strict path prefixes, nearest first. Empty for flat labels.
std::vector<TypeLabel> ancestors(const TypeLabel &label,
                                 const LabelVocabulary &vocab);

// Gold labels plus every ontology ancestor (ancestors only exist when the
// vocabulary declares an ontology).
std::vector<TypeLabel> positive_closure(const LabelSet &gold,
                                        const LabelVocabulary &vocab);

// Ontology mode: every (label, strict ancestor) within the closure.
// Tier mode: every cross-tier pair within gold, finer tier as descendant.
std::set<DependencyPair> induce_dependency_pairs(
    const std::vector<TypeLabel> &gold, const LabelVocabulary &vocab);

// Uniform draw from vocab \ positives. Throws SamplingError when empty.
const TypeLabel &sample_negative_type(const LabelVocabulary &vocab,
                                      const LabelSet &positives, Rng &rng);

// Uniform draw from vocab \ (true_ancestors + descendant), restricted to the
// ancestor's tier when the vocabulary has a tier partition.
const TypeLabel &sample_negative_ancestor(const DependencyPair &pair,
                                          const LabelVocabulary &vocab,
                                          const LabelSet &true_ancestors,
                                          Rng &rng);

}  // namespace typent

#endif  // TYPENT_LABELSPACE_H_
