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

#ifndef TYPENT_TEMPLATES_H_
#define TYPENT_TEMPLATES_H_

#include <string>
#include <string_view>

#include "json.hpp"
#include "typent/corpus.h"
#include "typent/labelspace.h"

namespace typent {

enum class TemplateKind { kTaxonomic, kContextual, kSubstitution };

std::string_view template_name(TemplateKind kind);
TemplateKind parse_template(std::string_view name);

enum class PairKind { kType, kDependency };

std::string_view pair_kind_name(PairKind kind);

struct PremiseHypothesisPair {
  std::string premise;
  std::string hypothesis;
  PairKind kind = PairKind::kType;
  std::string instance_id;
  // Raw label whose description is the hypothesis.
  std::string label;
  TemplateKind template_kind = TemplateKind::kTaxonomic;
};

// Type description (NLI hypothesis) for a mention and a candidate label:
//   taxonomic     "<mention> is a <surface>."
//   contextual    "In this context, <mention> is referring to <surface>."
//   substitution  the premise with the mention replaced by the surface form
std::string render_description(TemplateKind kind,
                               const MentionInstance &instance,
                               const TypeLabel &label);

PremiseHypothesisPair build_type_pair(const MentionInstance &instance,
                                      const TypeLabel &label,
                                      TemplateKind kind);

// Descendant description as premise, ancestor description as hypothesis.
// Not defined for the substitution template.
PremiseHypothesisPair build_dependency_pair(const MentionInstance &instance,
                                            const DependencyPair &dep,
                                            TemplateKind kind);

nlohmann::json pair_to_json(const PremiseHypothesisPair &pair);

}  // namespace typent

#endif  // TYPENT_TEMPLATES_H_
