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

#ifndef TYPENT_ERRORS_H_
#define TYPENT_ERRORS_H_

#include <stdexcept>
#include <string>

namespace typent {

// Base class for all errors raised by the library. Every error carries a
// short category so the CLI can report it uniformly.
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string &message)
      : std::runtime_error(category + " error: " + message),
        category_(std::move(category)) {}

  const std::string &category() const { return category_; }

 private:
  std::string category_;
};

#define TYPENT_DEFINE_ERROR(Name, category)                          \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string &message) : Error(category, message) {} \
  };

TYPENT_DEFINE_ERROR(LoadError, "load")
TYPENT_DEFINE_ERROR(SchemaError, "schema")
TYPENT_DEFINE_ERROR(ValidationError, "validation")
TYPENT_DEFINE_ERROR(SplitError, "split")
TYPENT_DEFINE_ERROR(ParseError, "parse")
TYPENT_DEFINE_ERROR(SamplingError, "sampling")
TYPENT_DEFINE_ERROR(RenderError, "rendering")
TYPENT_DEFINE_ERROR(UnsupportedTemplateError, "unsupported-template")
TYPENT_DEFINE_ERROR(TransportError, "transport")
TYPENT_DEFINE_ERROR(ProtocolError, "protocol")
TYPENT_DEFINE_ERROR(EvaluationError, "evaluation")
TYPENT_DEFINE_ERROR(ConfigError, "config")
TYPENT_DEFINE_ERROR(TrainingError, "training")

#undef TYPENT_DEFINE_ERROR

}  // namespace typent

#endif  // TYPENT_ERRORS_H_
