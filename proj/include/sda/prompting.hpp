/* Copyright 2026 The SDA Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sda/features.hpp"

namespace sda {

// A template body with {name} placeholders. Substitution is single-pass:
// substituted values are never rescanned, so example texts containing
// "{features}" pass through verbatim. Braces that do not enclose an
// identifier are literal.
class PromptTemplate {
 public:
  PromptTemplate() = default;
  PromptTemplate(std::string name, std::string body);

  const std::string& name() const { return name_; }
  const std::string& body() const { return body_; }
  const std::vector<std::string>& placeholders() const { return placeholders_; }

  // Throws UsageError if the template references a name missing from `fill`.
  std::string render(const std::map<std::string, std::string>& fill) const;

  // Characters of the body outside placeholders.
  size_t scaffold_size() const;

 private:
  std::string name_;
  std::string body_;
  std::vector<std::string> placeholders_;
};

struct PromptParts {
  std::string instruction;
  std::optional<std::string> features;
  std::vector<std::string> examples;

  nlohmann::json to_json() const;
  // FNV-1a 64 over the canonical JSON of the parts, as hex.
  std::string digest() const;
};

struct PromptBundle {
  std::string final_text;
  PromptParts parts;
  std::string query_id;
};

// The template files under a templates directory:
//   generation.txt            {query} {features}
//   feature-construction.txt  {examples} {characteristics}
//   disguise-examples.txt     {examples}     starts with "Examples:"
//   disguise-features.txt     {features}     starts with "Writing features:"
//   disguise-task.txt         {query}        starts with "Task:"
class PromptLibrary {
 public:
  PromptLibrary(PromptTemplate generation, PromptTemplate feature_construction,
                PromptTemplate disguise_examples, PromptTemplate disguise_features,
                PromptTemplate disguise_task);

  static PromptLibrary load(const std::string& dir);

  // Text-generation prompt used during feature extraction. Empty (version 0)
  // features leave the slot empty.
  PromptBundle render_generation_prompt(std::string_view query,
                                        const DisguiseFeatureSet& features,
                                        std::string_view query_id = {}) const;

  // Feature-construction prompt: embeds every example and lists the
  // characteristics in input order.
  PromptBundle render_feature_prompt(
      const std::vector<std::string>& examples,
      const std::vector<std::string>& characteristics) const;

  // Self-disguise prompt: examples, features, task, in that order. An empty
  // example list omits the examples section; version-0 features omit the
  // features section.
  PromptBundle render_disguise_prompt(std::string_view query,
                                      const DisguiseFeatureSet& features,
                                      const std::vector<std::string>& examples,
                                      std::string_view query_id = {}) const;

  // Upper bound on characters a rendered prompt adds beyond its parts for
  // `n_examples` examples and `n_characteristics` characteristics.
  size_t scaffold_bound(size_t n_examples, size_t n_characteristics = 0) const;

 private:
  PromptTemplate generation_;
  PromptTemplate feature_construction_;
  PromptTemplate disguise_examples_;
  PromptTemplate disguise_features_;
  PromptTemplate disguise_task_;
};

// "Example 1:\n<text>\n\nExample 2:\n<text>" ...
std::string format_examples(const std::vector<std::string>& examples);
// "- a\n- b" ...
std::string format_characteristics(const std::vector<std::string>& items);

}  // namespace sda
