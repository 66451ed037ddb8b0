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

#include "sda/prompting.hpp"

#include <filesystem>

#include "sda/error.hpp"
#include "sda/hashing.hpp"
#include "sda/text_util.hpp"

namespace sda {
namespace {

bool is_ident_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_';
}

// Calls on_text for literal runs and on_placeholder for {identifier} tokens.
template <typename OnText, typename OnPlaceholder>
void scan(std::string_view body, OnText&& on_text, OnPlaceholder&& on_placeholder) {
  size_t literal_start = 0;
  size_t i = 0;
  while (i < body.size()) {
    if (body[i] == '{') {
      size_t j = i + 1;
      while (j < body.size() && is_ident_char(body[j])) ++j;
      if (j > i + 1 && j < body.size() && body[j] == '}') {
        on_text(body.substr(literal_start, i - literal_start));
        on_placeholder(body.substr(i + 1, j - i - 1));
        i = j + 1;
        literal_start = i;
        continue;
      }
    }
    ++i;
  }
  on_text(body.substr(literal_start));
}

}  // namespace

PromptTemplate::PromptTemplate(std::string name, std::string body)
    : name_(std::move(name)), body_(std::move(body)) {
  scan(body_, [](std::string_view) {},
       [&](std::string_view p) { placeholders_.emplace_back(p); });
}

std::string PromptTemplate::render(
    const std::map<std::string, std::string>& fill) const {
  std::string out;
  out.reserve(body_.size());
  scan(
      body_, [&](std::string_view lit) { out.append(lit); },
      [&](std::string_view p) {
        auto it = fill.find(std::string(p));
        if (it == fill.end()) {
          throw UsageError("template '" + name_ + "' references {" +
                           std::string(p) + "} which has no value");
        }
        out.append(it->second);
      });
  return out;
}

size_t PromptTemplate::scaffold_size() const {
  size_t n = 0;
  scan(body_, [&](std::string_view lit) { n += lit.size(); },
       [](std::string_view) {});
  return n;
}

nlohmann::json PromptParts::to_json() const {
  nlohmann::json j = {{"instruction", instruction}, {"examples", examples}};
  j["features"] = features ? nlohmann::json(*features) : nlohmann::json(nullptr);
  return j;
}

std::string PromptParts::digest() const { return hex64(fnv1a64(to_json().dump())); }

std::string format_examples(const std::vector<std::string>& examples) {
  std::string out;
  for (size_t i = 0; i < examples.size(); ++i) {
    if (i > 0) out += "\n\n";
    out += "Example " + std::to_string(i + 1) + ":\n";
    out += examples[i];
  }
  return out;
}

std::string format_characteristics(const std::vector<std::string>& items) {
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += "\n";
    out += "- " + items[i];
  }
  return out;
}

namespace {

// Per-item characters added by format_examples / format_characteristics.
constexpr size_t kExampleLabelOverhead = 16;
constexpr size_t kCharacteristicOverhead = 3;

void require_prefix(const PromptTemplate& t, std::string_view prefix) {
  if (t.body().rfind(prefix, 0) != 0) {
    throw UsageError("template '" + t.name() + "' must start with \"" +
                     std::string(prefix) + "\"");
  }
}

void require_placeholders(const PromptTemplate& t,
                          std::initializer_list<std::string_view> names) {
  for (auto n : names) {
    bool found = false;
    for (const auto& p : t.placeholders()) found = found || p == n;
    if (!found) {
      throw UsageError("template '" + t.name() + "' lacks {" + std::string(n) +
                       "}");
    }
  }
}

}  // namespace

PromptLibrary::PromptLibrary(PromptTemplate generation,
                             PromptTemplate feature_construction,
                             PromptTemplate disguise_examples,
                             PromptTemplate disguise_features,
                             PromptTemplate disguise_task)
    : generation_(std::move(generation)),
      feature_construction_(std::move(feature_construction)),
      disguise_examples_(std::move(disguise_examples)),
      disguise_features_(std::move(disguise_features)),
      disguise_task_(std::move(disguise_task)) {
  require_placeholders(generation_, {"query", "features"});
  require_placeholders(feature_construction_, {"examples", "characteristics"});
  require_placeholders(disguise_examples_, {"examples"});
  require_placeholders(disguise_features_, {"features"});
  require_placeholders(disguise_task_, {"query"});
  require_prefix(disguise_examples_, "Examples:");
  require_prefix(disguise_features_, "Writing features:");
  require_prefix(disguise_task_, "Task:");
}

PromptLibrary PromptLibrary::load(const std::string& dir) {
  auto load_one = [&](const char* name) {
    auto path = (std::filesystem::path(dir) / (std::string(name) + ".txt")).string();
    std::string body = text::read_file(path);
    if (body.find('\r') != std::string::npos) {
      throw UsageError("template " + path + " must use LF line endings");
    }
    return PromptTemplate(name, std::move(body));
  };
  return PromptLibrary(load_one("generation"), load_one("feature-construction"),
                       load_one("disguise-examples"), load_one("disguise-features"),
                       load_one("disguise-task"));
}

PromptBundle PromptLibrary::render_generation_prompt(
    std::string_view query, const DisguiseFeatureSet& features,
    std::string_view query_id) const {
  if (text::is_blank(query)) throw InvariantError("empty query");
  PromptBundle b;
  b.parts.instruction = std::string(query);
  b.parts.features = features.text;
  b.final_text = generation_.render(
      {{"query", b.parts.instruction}, {"features", features.text}});
  b.query_id = std::string(query_id);
  return b;
}

PromptBundle PromptLibrary::render_feature_prompt(
    const std::vector<std::string>& examples,
    const std::vector<std::string>& characteristics) const {
  if (examples.empty()) throw InvariantError("feature prompt needs examples");
  PromptBundle b;
  b.parts.instruction = format_characteristics(characteristics);
  b.parts.examples = examples;
  b.final_text = feature_construction_.render(
      {{"examples", format_examples(examples)},
       {"characteristics", b.parts.instruction}});
  return b;
}

PromptBundle PromptLibrary::render_disguise_prompt(
    std::string_view query, const DisguiseFeatureSet& features,
    const std::vector<std::string>& examples, std::string_view query_id) const {
  if (text::is_blank(query)) throw InvariantError("empty query");
  PromptBundle b;
  b.parts.instruction = std::string(query);
  b.parts.examples = examples;
  if (!features.text.empty()) b.parts.features = features.text;
  b.query_id = std::string(query_id);

  if (!examples.empty()) {
    b.final_text += disguise_examples_.render({{"examples", format_examples(examples)}});
  }
  if (b.parts.features) {
    b.final_text += disguise_features_.render({{"features", *b.parts.features}});
  }
  b.final_text += disguise_task_.render({{"query", b.parts.instruction}});
  return b;
}

size_t PromptLibrary::scaffold_bound(size_t n_examples,
                                     size_t n_characteristics) const {
  const size_t disguise = disguise_examples_.scaffold_size() +
                          disguise_features_.scaffold_size() +
                          disguise_task_.scaffold_size();
  const size_t templates = std::max({generation_.scaffold_size(),
                                     feature_construction_.scaffold_size(),
                                     disguise});
  return templates + n_examples * kExampleLabelOverhead +
         n_characteristics * kCharacteristicOverhead;
}

}  // namespace sda
