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

#include "typent/labelspace.h"

#include <algorithm>
#include <fstream>

#include "typent/errors.h"

namespace typent {

std::string_view tier_name(Tier tier) {
  switch (tier) {
    case Tier::kUltrafine: return "ultrafine";
    case Tier::kFine: return "fine";
    case Tier::kGeneral: return "general";
    case Tier::kUnspecified: return "unspecified";
  }
  return "unspecified";
}

Tier parse_tier(std::string_view name) {
  std::string n = to_lower_ascii(trim(name));
  if (n == "ultrafine" || n == "ultra-fine" || n == "ultra_fine")
    return Tier::kUltrafine;
  if (n == "fine") return Tier::kFine;
  if (n == "general") return Tier::kGeneral;
  if (n == "unspecified") return Tier::kUnspecified;
  throw ParseError("unknown tier '" + std::string(name) + "'");
}

TypeLabel parse_label(std::string_view raw, const TierPartition *tiers) {
  if (raw.empty()) throw ParseError("empty label");
  TypeLabel label;
  label.raw = std::string(raw);
  if (raw.front() == '/') {
    size_t i = 0;
    while (i < raw.size()) {
      size_t j = raw.find('/', i);
      if (j == std::string_view::npos) j = raw.size();
      if (j > i) label.segments.emplace_back(raw.substr(i, j - i));
      i = j + 1;
    }
    if (label.segments.empty())
      throw ParseError("label '" + label.raw + "' has no path segments");
  } else {
    label.segments.push_back(label.raw);
  }
  label.surface = label.segments.back();
  std::replace(label.surface.begin(), label.surface.end(), '_', ' ');
  if (tiers) {
    auto it = tiers->find(label.raw);
    if (it != tiers->end()) label.tier = it->second;
  }
  return label;
}

LabelVocabulary::LabelVocabulary(const std::vector<std::string> &raws,
                                 std::optional<TierPartition> tiers)
    : tiers_(std::move(tiers)) {
  const TierPartition *tp = tiers_ ? &*tiers_ : nullptr;
  std::set<std::string> unique(raws.begin(), raws.end());
  labels_.reserve(unique.size());
  for (const auto &raw : unique) {
    labels_.push_back(parse_label(raw, tp));
    if (labels_.back().hierarchical() && labels_.back().segments.size() > 1)
      has_ontology_ = true;
  }
  for (size_t i = 0; i < labels_.size(); ++i) index_[labels_[i].raw] = i;
}

LabelVocabulary LabelVocabulary::load(const std::filesystem::path &vocab_path,
                                      const std::filesystem::path &tier_path) {
  std::ifstream in(vocab_path);
  if (!in) throw LoadError("cannot open vocabulary " + vocab_path.string());
  std::vector<std::string> raws;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (!t.empty()) raws.push_back(std::move(t));
  }

  std::optional<TierPartition> tiers;
  if (!tier_path.empty()) {
    std::ifstream tin(tier_path);
    if (!tin) throw LoadError("cannot open tier file " + tier_path.string());
    tiers.emplace();
    size_t line_no = 0;
    while (std::getline(tin, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      size_t tab = line.find('\t');
      if (tab == std::string::npos) {
        throw ParseError(tier_path.string() + " line " +
                         std::to_string(line_no) + ": expected label<TAB>tier");
      }
      (*tiers)[trim(std::string_view(line).substr(0, tab))] =
          parse_tier(std::string_view(line).substr(tab + 1));
    }
  }
  return LabelVocabulary(raws, std::move(tiers));
}

const TypeLabel *LabelVocabulary::find(std::string_view raw) const {
  auto it = index_.find(std::string(raw));
  return it == index_.end() ? nullptr : &labels_[it->second];
}

TypeLabel LabelVocabulary::resolve(std::string_view raw) const {
  if (const TypeLabel *l = find(raw)) return *l;
  return parse_label(raw, tiers_ ? &*tiers_ : nullptr);
}

std::vector<TypeLabel> ancestors(const TypeLabel &label,
                                 const LabelVocabulary &vocab) {
  std::vector<TypeLabel> out;
  if (!label.hierarchical()) return out;
  for (size_t n = label.segments.size() - 1; n >= 1; --n) {
    std::string path;
    for (size_t i = 0; i < n; ++i) path += "/" + label.segments[i];
    out.push_back(vocab.resolve(path));
  }
  return out;
}

std::vector<TypeLabel> positive_closure(const LabelSet &gold,
                                        const LabelVocabulary &vocab) {
  std::map<std::string, TypeLabel> closure;
  for (const auto &raw : gold) {
    TypeLabel label = vocab.resolve(raw);
    if (vocab.has_ontology()) {
      for (auto &a : ancestors(label, vocab)) closure.emplace(a.raw, a);
    }
    closure.emplace(label.raw, std::move(label));
  }
  std::vector<TypeLabel> out;
  out.reserve(closure.size());
  for (auto &[raw, label] : closure) out.push_back(std::move(label));
  return out;
}

std::set<DependencyPair> induce_dependency_pairs(
    const std::vector<TypeLabel> &gold, const LabelVocabulary &vocab) {
  std::set<DependencyPair> pairs;
  if (vocab.has_ontology()) {
    std::map<std::string, TypeLabel> closure;
    for (const auto &label : gold) {
      closure.emplace(label.raw, label);
      for (auto &a : ancestors(label, vocab)) closure.emplace(a.raw, a);
    }
    for (const auto &[raw, label] : closure) {
      for (auto &a : ancestors(label, vocab)) {
        if (a.raw != label.raw) pairs.insert({label, std::move(a)});
      }
    }
  } else if (vocab.tier_partition()) {
    for (const auto &d : gold) {
      if (d.tier == Tier::kUnspecified) continue;
      for (const auto &a : gold) {
        if (a.tier == Tier::kUnspecified) continue;
        if (d.tier < a.tier) pairs.insert({d, a});
      }
    }
  }
  return pairs;
}

namespace {

// Uniform draw over the vocabulary members accepted by `keep`. Falls back to
// an explicit candidate list when rejection would be slow.
template <typename Pred>
const TypeLabel *draw_filtered(const LabelVocabulary &vocab, size_t excluded,
                               Pred keep, Rng &rng) {
  const auto &labels = vocab.labels();
  if (labels.empty()) return nullptr;
  if (excluded * 2 < labels.size()) {
    for (;;) {
      const TypeLabel &cand = labels[rng.uniform_index(labels.size())];
      if (keep(cand)) return &cand;
    }
  }
  std::vector<const TypeLabel *> pool;
  for (const auto &l : labels)
    if (keep(l)) pool.push_back(&l);
  if (pool.empty()) return nullptr;
  return pool[rng.uniform_index(pool.size())];
}

}  // namespace

const TypeLabel &sample_negative_type(const LabelVocabulary &vocab,
                                      const LabelSet &positives, Rng &rng) {
  size_t excluded = 0;
  for (const auto &p : positives)
    if (vocab.contains(p)) ++excluded;
  if (excluded >= vocab.size()) {
    throw SamplingError("no negative type: all " +
                        std::to_string(vocab.size()) +
                        " vocabulary labels are positives");
  }
  const TypeLabel *pick = draw_filtered(
      vocab, excluded,
      [&](const TypeLabel &l) { return !positives.count(l.raw); }, rng);
  return *pick;
}

const TypeLabel &sample_negative_ancestor(const DependencyPair &pair,
                                          const LabelVocabulary &vocab,
                                          const LabelSet &true_ancestors,
                                          Rng &rng) {
  const bool by_tier = vocab.tier_partition().has_value() &&
                       pair.ancestor.tier != Tier::kUnspecified;
  auto keep = [&](const TypeLabel &l) {
    if (l.raw == pair.descendant.raw || true_ancestors.count(l.raw))
      return false;
    return !by_tier || l.tier == pair.ancestor.tier;
  };
  // With a tier restriction most of the vocabulary is rejected, so always use
  // the explicit pool there.
  size_t excluded = by_tier ? vocab.size() : true_ancestors.size() + 1;
  const TypeLabel *pick = draw_filtered(vocab, excluded, keep, rng);
  if (!pick) {
    throw SamplingError("no negative ancestor candidate for (" +
                        pair.descendant.raw + ", " + pair.ancestor.raw + ")");
  }
  return *pick;
}

}  // namespace typent
