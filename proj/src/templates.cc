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

#include "typent/templates.h"

#include <cctype>

#include "typent/errors.h"
#include "typent/util.h"

namespace typent {

std::string_view template_name(TemplateKind kind) {
  switch (kind) {
    case TemplateKind::kTaxonomic: return "taxonomic";
    case TemplateKind::kContextual: return "contextual";
    case TemplateKind::kSubstitution: return "substitution";
  }
  return "taxonomic";
}

TemplateKind parse_template(std::string_view name) {
  if (name == "taxonomic") return TemplateKind::kTaxonomic;
  if (name == "contextual") return TemplateKind::kContextual;
  if (name == "substitution") return TemplateKind::kSubstitution;
  throw ConfigError("unknown template '" + std::string(name) + "'");
}

std::string_view pair_kind_name(PairKind kind) {
  return kind == PairKind::kType ? "type" : "dependency";
}

namespace {

bool sentence_initial(const MentionInstance &instance) {
  if (instance.left_tokens.empty()) return true;
  const std::string &prev = instance.left_tokens.back();
  if (prev.empty()) return false;
  char last = prev.back();
  return last == '.' || last == '!' || last == '?';
}

std::string substitute(const MentionInstance &instance,
                       const TypeLabel &label) {
  std::string premise = render_premise(instance);
  const size_t offset = mention_offset(instance);
  if (trim(instance.mention).empty() ||
      premise.compare(offset, instance.mention.size(), instance.mention) != 0) {
    throw RenderError("cannot locate mention '" + instance.mention +
                      "' in the premise of instance " + instance.id);
  }
  std::string replacement = label.surface;
  if (sentence_initial(instance) && !replacement.empty()) {
    replacement[0] = static_cast<char>(
        std::toupper(static_cast<unsigned char>(replacement[0])));
  }
  premise.replace(offset, instance.mention.size(), replacement);
  return premise;
}

}  // namespace

std::string render_description(TemplateKind kind,
                               const MentionInstance &instance,
                               const TypeLabel &label) {
  if (label.surface.empty()) {
    throw RenderError("label '" + label.raw + "' has an empty surface form");
  }
  switch (kind) {
    case TemplateKind::kTaxonomic:
      return instance.mention + " is a " + label.surface + ".";
    case TemplateKind::kContextual:
      return "In this context, " + instance.mention + " is referring to " +
             label.surface + ".";
    case TemplateKind::kSubstitution:
      return substitute(instance, label);
  }
  return {};
}

PremiseHypothesisPair build_type_pair(const MentionInstance &instance,
                                      const TypeLabel &label,
                                      TemplateKind kind) {
  PremiseHypothesisPair pair;
  pair.hypothesis = render_description(kind, instance, label);
  pair.premise = render_premise(instance);
  pair.kind = PairKind::kType;
  pair.instance_id = instance.id;
  pair.label = label.raw;
  pair.template_kind = kind;
  return pair;
}

PremiseHypothesisPair build_dependency_pair(const MentionInstance &instance,
                                            const DependencyPair &dep,
                                            TemplateKind kind) {
  if (kind == TemplateKind::kSubstitution) {
    throw UnsupportedTemplateError(
        "dependency pairs are not defined for the substitution template");
  }
  PremiseHypothesisPair pair;
  pair.premise = render_description(kind, instance, dep.descendant);
  pair.hypothesis = render_description(kind, instance, dep.ancestor);
  pair.kind = PairKind::kDependency;
  pair.instance_id = instance.id;
  pair.label = dep.ancestor.raw;
  pair.template_kind = kind;
  return pair;
}

nlohmann::json pair_to_json(const PremiseHypothesisPair &pair) {
  return nlohmann::json{{"premise", pair.premise},
                        {"hypothesis", pair.hypothesis},
                        {"kind", pair_kind_name(pair.kind)},
                        {"instance_id", pair.instance_id},
                        {"label", pair.label},
                        {"template", template_name(pair.template_kind)}};
}

}  // namespace typent
