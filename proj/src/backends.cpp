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

#include "sda/backends.hpp"

#include <cmath>
#include <cstdlib>

#include "sda/error.hpp"
#include "sda/hashing.hpp"
#include "sda/text_util.hpp"

namespace sda {

using nlohmann::json;

void GenParams::validate() const {
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw UsageError("temperature must lie in [0, 2]");
  }
  if (max_tokens < 1) throw UsageError("max_tokens must be >= 1");
}

GenParams GenParams::from_json(const json& j) {
  GenParams p;
  p.temperature = j.value("temperature", p.temperature);
  p.max_tokens = j.value("max_tokens", p.max_tokens);
  if (j.contains("seed") && !j["seed"].is_null()) {
    p.seed = j["seed"].get<uint64_t>();
  }
  p.validate();
  return p;
}

json GenParams::to_json() const {
  json j = {{"temperature", temperature}, {"max_tokens", max_tokens}};
  j["seed"] = seed ? json(*seed) : json(nullptr);
  return j;
}

EmbeddingVector EmbeddingVector::normalize(std::vector<double> raw) {
  if (raw.empty()) throw InvariantError("embedding has zero dimension");
  double sq = 0.0;
  for (double v : raw) {
    if (!std::isfinite(v)) throw InvariantError("embedding is not finite");
    sq += v * v;
  }
  if (sq == 0.0) throw InvariantError("embedding is the zero vector");
  const double norm = std::sqrt(sq);
  for (double& v : raw) v /= norm;
  return EmbeddingVector(std::move(raw));
}

double EmbeddingVector::dot(const EmbeddingVector& other) const {
  if (other.dimension() != dimension()) {
    throw InvariantError("embedding dimension mismatch");
  }
  double s = 0.0;
  for (size_t i = 0; i < values_.size(); ++i) s += values_[i] * other.values_[i];
  return s;
}

// ---------------------------------------------------------------------------
// Kinds and specs

namespace {

struct KindName {
  BackendKind kind;
  std::string_view name;
};

constexpr KindName kKindNames[] = {
    {BackendKind::kHttpChat, "http-chat"},
    {BackendKind::kMockGenerator, "mock-generator"},
    {BackendKind::kHttpDetector, "http-detector"},
    {BackendKind::kBuiltinDetector, "builtin-detector"},
    {BackendKind::kHttpEmbedder, "http-embedder"},
    {BackendKind::kBuiltinEmbedder, "builtin-embedder"},
    {BackendKind::kHttpScorer, "http-scorer"},
    {BackendKind::kBuiltinScorer, "builtin-scorer"},
};

}  // namespace

std::string_view to_string(BackendKind kind) {
  for (const auto& kn : kKindNames) {
    if (kn.kind == kind) return kn.name;
  }
  return "unknown";
}

BackendKind parse_backend_kind(std::string_view name) {
  for (const auto& kn : kKindNames) {
    if (kn.name == name) return kn.kind;
  }
  throw UsageError("unknown backend kind '" + std::string(name) + "'");
}

BackendRole role_of(BackendKind kind) {
  switch (kind) {
    case BackendKind::kHttpChat:
    case BackendKind::kMockGenerator:
      return BackendRole::kGenerator;
    case BackendKind::kHttpDetector:
    case BackendKind::kBuiltinDetector:
      return BackendRole::kDetector;
    case BackendKind::kHttpEmbedder:
    case BackendKind::kBuiltinEmbedder:
      return BackendRole::kEmbedder;
    case BackendKind::kHttpScorer:
    case BackendKind::kBuiltinScorer:
      return BackendRole::kScorer;
  }
  return BackendRole::kGenerator;
}

bool is_http(BackendKind kind) {
  return kind == BackendKind::kHttpChat || kind == BackendKind::kHttpDetector ||
         kind == BackendKind::kHttpEmbedder || kind == BackendKind::kHttpScorer;
}

void BackendSpec::validate() const {
  if (id.empty()) throw UsageError("backend id must be non-empty");
  if (is_http(kind) && !endpoint) {
    throw UsageError("backend '" + id + "' (" + std::string(to_string(kind)) +
                     ") requires an endpoint");
  }
  if (!is_http(kind) && endpoint) {
    throw UsageError("backend '" + id + "' (" + std::string(to_string(kind)) +
                     ") must not have an endpoint");
  }
  if (!options.is_object()) {
    throw UsageError("backend '" + id + "' options must be an object");
  }
}

namespace {

std::optional<std::string> optional_string(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<std::string>();
}

}  // namespace

BackendSpec BackendSpec::from_json(const json& j) {
  if (!j.is_object()) throw UsageError("backend spec must be a JSON object");
  BackendSpec spec;
  try {
    spec.kind = parse_backend_kind(j.at("kind").get<std::string>());
    spec.id = j.value("id", std::string(to_string(spec.kind)));
    spec.endpoint = optional_string(j, "endpoint");
    spec.model_id = optional_string(j, "model_id");
    spec.auth_env_var = optional_string(j, "auth_env_var");
    if (j.contains("options")) spec.options = j["options"];
  } catch (const json::exception& e) {
    throw UsageError(std::string("invalid backend spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

json BackendSpec::to_json() const {
  json j = {{"id", id}, {"kind", std::string(to_string(kind))}};
  if (endpoint) j["endpoint"] = *endpoint;
  if (model_id) j["model_id"] = *model_id;
  if (auth_env_var) j["auth_env_var"] = *auth_env_var;
  j["options"] = options;
  return j;
}

// ---------------------------------------------------------------------------
// Interface wrappers

GeneratedText TextGenerator::generate(std::string_view prompt,
                                      const GenParams& params,
                                      std::string_view query_id) const {
  if (text::is_blank(prompt)) throw InvariantError("generate: empty prompt");
  params.validate();
  std::string out = complete(prompt, params);
  if (text::is_blank(out)) {
    throw BackendError("generator '" + id() + "' returned an empty completion");
  }
  return {std::move(out), id(), std::string(query_id)};
}

DetectionResult Detector::detect(std::string_view text, double sigma) const {
  if (text::is_blank(text)) throw InvariantError("detect: empty text");
  if (!(sigma > 0.0 && sigma < 1.0)) {
    throw UsageError("detection threshold must lie in (0, 1)");
  }
  const double p = probability_ai(text);
  if (!(p >= 0.0 && p <= 1.0)) {
    throw BackendError("detector '" + id() + "' returned probability outside [0,1]");
  }
  return {p, p >= sigma, id()};
}

EmbeddingVector Embedder::embed(std::string_view text) const {
  if (text::is_blank(text)) {
    throw InvariantError("embed: text has no non-whitespace characters");
  }
  return EmbeddingVector::normalize(raw_embedding(text));
}

// ---------------------------------------------------------------------------
// Mock generator

MockGenerator::MockGenerator(std::string id, std::vector<std::string> machine_pool,
                             std::vector<std::string> human_pool)
    : TextGenerator(std::move(id)),
      machine_pool_(std::move(machine_pool)),
      human_pool_(std::move(human_pool)) {
  if (machine_pool_.empty() || human_pool_.empty()) {
    throw UsageError("mock generator pools must be non-empty");
  }
}

std::unique_ptr<MockGenerator> MockGenerator::fixed(std::string id,
                                                    std::string text) {
  auto g = std::unique_ptr<MockGenerator>(
      new MockGenerator(std::move(id), {"-"}, {"-"}));
  g->fixed_ = std::move(text);
  return g;
}

uint64_t MockGenerator::pool_hash(std::string_view prompt, uint64_t seed) {
  return fnv1a64_u64(seed, fnv1a64(prompt));
}

std::string MockGenerator::complete(std::string_view prompt,
                                    const GenParams& params) const {
  if (fixed_) return *fixed_;
  const auto& pool = prompt.find(kFeaturesMarker) != std::string_view::npos
                         ? human_pool_
                         : machine_pool_;
  const uint64_t h = pool_hash(prompt, params.seed.value_or(0));
  return pool[h % pool.size()];
}

// ---------------------------------------------------------------------------
// Built-in detector

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_' || c >= 0x80;
}

size_t count_pronouns(std::string_view s) {
  static constexpr std::string_view kPronouns[] = {"I", "we", "my", "our"};
  size_t count = 0;
  size_t i = 0;
  while (i < s.size()) {
    if (!is_word_byte(static_cast<unsigned char>(s[i]))) {
      ++i;
      continue;
    }
    size_t start = i;
    while (i < s.size() && is_word_byte(static_cast<unsigned char>(s[i]))) ++i;
    std::string_view word = s.substr(start, i - start);
    for (auto p : kPronouns) {
      if (word == p) ++count;
    }
  }
  return count;
}

}  // namespace

StyleFeatures extract_style_features(std::string_view s) {
  const auto words = text::split_whitespace(s);
  if (words.empty()) throw InvariantError("style features of empty text");
  const double n = static_cast<double>(words.size());

  size_t commas = 0;
  for (char c : s) commas += (c == ',');

  size_t sentences = 0;
  size_t seg_start = 0;
  for (size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == '.' || s[i] == '!' || s[i] == '?') {
      if (!text::split_whitespace(s.substr(seg_start, i - seg_start)).empty()) {
        ++sentences;
      }
      seg_start = i + 1;
    }
  }
  if (sentences == 0) sentences = 1;

  StyleFeatures f;
  f.comma_rate = static_cast<double>(commas) / n;
  f.pronoun_rate = 100.0 * static_cast<double>(count_pronouns(s)) / n;
  f.mean_sentence_length = n / static_cast<double>(sentences);
  return f;
}

double BuiltinDetector::probability_ai(std::string_view text) const {
  const StyleFeatures f = extract_style_features(text);
  const double z = kBias + kCommaWeight * f.comma_rate +
                   kPronounWeight * f.pronoun_rate +
                   kSentenceLengthWeight * f.mean_sentence_length;
  return 1.0 / (1.0 + std::exp(-z));
}

// ---------------------------------------------------------------------------
// Built-in embedder

BuiltinEmbedder::BuiltinEmbedder(std::string id, size_t dimension)
    : Embedder(std::move(id)), dimension_(dimension) {
  if (dimension_ == 0) throw UsageError("embedding dimension must be >= 1");
}

std::vector<double> BuiltinEmbedder::bucket_counts(std::string_view text) const {
  std::string padded;
  padded.reserve(text.size() + 2);
  padded.push_back(kBoundary);
  padded += text::to_lower_ascii(text);
  padded.push_back(kBoundary);

  std::vector<double> buckets(dimension_, 0.0);
  for (size_t i = 0; i + 3 <= padded.size(); ++i) {
    const uint64_t h = fnv1a64(std::string_view(padded).substr(i, 3));
    buckets[h % dimension_] += 1.0;
  }
  return buckets;
}

std::vector<double> BuiltinEmbedder::raw_embedding(std::string_view text) const {
  return bucket_counts(text);
}

// ---------------------------------------------------------------------------
// Unigram scorer

UnigramScorer::UnigramScorer(std::string id, std::string_view training_corpus)
    : PerplexityScorer(std::move(id)) {
  for (auto tok : text::split_whitespace(training_corpus)) {
    ++counts_[std::string(tok)];
    ++total_tokens_;
  }
}

double UnigramScorer::probability(std::string_view token) const {
  const double denom =
      static_cast<double>(total_tokens_ + counts_.size() + 1);
  auto it = counts_.find(std::string(token));
  const double count = it == counts_.end() ? 0.0 : static_cast<double>(it->second);
  return (count + 1.0) / denom;
}

double UnigramScorer::score_perplexity(std::string_view text) const {
  const auto tokens = text::split_whitespace(text);
  if (tokens.empty()) throw InvariantError("perplexity of zero tokens");
  double log_sum = 0.0;
  for (auto tok : tokens) log_sum += std::log(probability(tok));
  return std::exp(-log_sum / static_cast<double>(tokens.size()));
}

// ---------------------------------------------------------------------------
// HTTP backends

json HttpEndpoint::call(const json& request) const {
  if (!transport) throw UsageError("no HTTP transport configured");
  HttpHeaders headers = {{"Content-Type", "application/json"}};
  if (auth_env_var) {
    const char* token = std::getenv(auth_env_var->c_str());
    if (token == nullptr || *token == '\0') {
      throw UsageError("environment variable " + *auth_env_var + " is not set");
    }
    headers.emplace_back("Authorization", std::string("Bearer ") + token);
  }
  HttpResponse res = post_with_retry(*transport, retry, url, headers, request.dump());
  try {
    return json::parse(res.body);
  } catch (const json::parse_error& e) {
    throw BackendError("malformed JSON response from " + url + ": " + e.what());
  }
}

HttpChatGenerator::HttpChatGenerator(std::string id, HttpEndpoint endpoint,
                                     std::string model,
                                     std::optional<std::string> system_prompt)
    : TextGenerator(std::move(id)),
      endpoint_(std::move(endpoint)),
      model_(std::move(model)),
      system_prompt_(std::move(system_prompt)) {}

json HttpChatGenerator::build_request(std::string_view prompt,
                                      const GenParams& params) const {
  json messages = json::array();
  if (system_prompt_) {
    messages.push_back({{"role", "system"}, {"content", *system_prompt_}});
  }
  messages.push_back({{"role", "user"}, {"content", std::string(prompt)}});
  return {{"model", model_},
          {"messages", messages},
          {"temperature", params.temperature},
          {"max_tokens", params.max_tokens}};
}

std::string HttpChatGenerator::complete(std::string_view prompt,
                                        const GenParams& params) const {
  json res = endpoint_.call(build_request(prompt, params));
  try {
    return res.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw BackendError("chat response from " + endpoint_.url +
                       " lacks choices[0].message.content");
  }
}

HttpDetector::HttpDetector(std::string id, HttpEndpoint endpoint)
    : Detector(std::move(id)), endpoint_(std::move(endpoint)) {}

double HttpDetector::probability_ai(std::string_view text) const {
  json res = endpoint_.call({{"text", std::string(text)}});
  if (!res.contains("probability_ai") || !res["probability_ai"].is_number()) {
    throw BackendError("detector response from " + endpoint_.url +
                       " lacks numeric probability_ai");
  }
  return res["probability_ai"].get<double>();
}

HttpEmbedder::HttpEmbedder(std::string id, HttpEndpoint endpoint, size_t dimension)
    : Embedder(std::move(id)), endpoint_(std::move(endpoint)), dimension_(dimension) {}

std::vector<double> HttpEmbedder::raw_embedding(std::string_view text) const {
  json res = endpoint_.call({{"text", std::string(text)}});
  std::vector<double> values;
  try {
    values = res.at("embedding").get<std::vector<double>>();
  } catch (const json::exception&) {
    throw BackendError("embedder response from " + endpoint_.url +
                       " lacks a numeric embedding array");
  }
  if (dimension_ != 0 && values.size() != dimension_) {
    throw BackendError("embedder returned dimension " +
                       std::to_string(values.size()) + ", expected " +
                       std::to_string(dimension_));
  }
  return values;
}

HttpScorer::HttpScorer(std::string id, HttpEndpoint endpoint)
    : PerplexityScorer(std::move(id)), endpoint_(std::move(endpoint)) {}

double HttpScorer::score_perplexity(std::string_view text) const {
  if (text::split_whitespace(text).empty()) {
    throw InvariantError("perplexity of zero tokens");
  }
  json res = endpoint_.call({{"text", std::string(text)}});
  if (!res.contains("perplexity") || !res["perplexity"].is_number()) {
    throw BackendError("scorer response from " + endpoint_.url +
                       " lacks numeric perplexity");
  }
  const double ppl = res["perplexity"].get<double>();
  if (!(ppl > 0.0) || !std::isfinite(ppl)) {
    throw BackendError("scorer returned non-positive perplexity");
  }
  return ppl;
}

// ---------------------------------------------------------------------------
// Factories

namespace {

void require_role(const BackendSpec& spec, BackendRole role, const char* what) {
  spec.validate();
  if (role_of(spec.kind) != role) {
    throw UsageError("backend '" + spec.id + "' of kind " +
                     std::string(to_string(spec.kind)) + " is not " + what);
  }
}

std::string option_path(const BackendSpec& spec, const BackendContext& ctx,
                        const char* key) {
  if (!spec.options.contains(key) || !spec.options[key].is_string()) {
    throw UsageError("backend '" + spec.id + "' requires option '" + key + "'");
  }
  std::filesystem::path p = spec.options[key].get<std::string>();
  if (p.is_relative()) p = ctx.base_dir / p;
  return p.string();
}

HttpEndpoint endpoint_for(const BackendSpec& spec, const BackendContext& ctx) {
  return {*spec.endpoint, spec.auth_env_var,
          ctx.transport ? ctx.transport : make_http_transport(), ctx.retry};
}

size_t option_dimension(const BackendSpec& spec, size_t fallback) {
  if (!spec.options.contains("dimension")) return fallback;
  const auto d = spec.options["dimension"].get<long long>();
  if (d < 0) throw UsageError("embedding dimension must be non-negative");
  return static_cast<size_t>(d);
}

}  // namespace

std::shared_ptr<const TextGenerator> make_generator(const BackendSpec& spec,
                                                    const BackendContext& ctx) {
  require_role(spec, BackendRole::kGenerator, "a text generator");
  if (spec.kind == BackendKind::kHttpChat) {
    std::optional<std::string> system;
    if (spec.options.contains("system_prompt")) {
      system = spec.options["system_prompt"].get<std::string>();
    }
    return std::make_shared<HttpChatGenerator>(
        spec.id, endpoint_for(spec, ctx), spec.model_id.value_or(""), system);
  }
  if (spec.options.contains("fixed_response")) {
    std::string text{text::trim(text::read_file(option_path(spec, ctx, "fixed_response")))};
    return MockGenerator::fixed(spec.id, std::move(text));
  }
  return std::make_shared<MockGenerator>(
      spec.id, text::read_lines(option_path(spec, ctx, "machine_pool")),
      text::read_lines(option_path(spec, ctx, "human_pool")));
}

std::shared_ptr<const Detector> make_detector(const BackendSpec& spec,
                                              const BackendContext& ctx) {
  require_role(spec, BackendRole::kDetector, "a detector");
  if (spec.kind == BackendKind::kHttpDetector) {
    return std::make_shared<HttpDetector>(spec.id, endpoint_for(spec, ctx));
  }
  return std::make_shared<BuiltinDetector>(spec.id);
}

std::shared_ptr<const Embedder> make_embedder(const BackendSpec& spec,
                                              const BackendContext& ctx) {
  require_role(spec, BackendRole::kEmbedder, "an embedder");
  if (spec.kind == BackendKind::kHttpEmbedder) {
    return std::make_shared<HttpEmbedder>(spec.id, endpoint_for(spec, ctx),
                                          option_dimension(spec, 0));
  }
  return std::make_shared<BuiltinEmbedder>(
      spec.id, option_dimension(spec, BuiltinEmbedder::kDefaultDimension));
}

std::shared_ptr<const PerplexityScorer> make_scorer(const BackendSpec& spec,
                                                    const BackendContext& ctx) {
  require_role(spec, BackendRole::kScorer, "a perplexity scorer");
  if (spec.kind == BackendKind::kHttpScorer) {
    return std::make_shared<HttpScorer>(spec.id, endpoint_for(spec, ctx));
  }
  return std::make_shared<UnigramScorer>(
      spec.id, text::read_file(option_path(spec, ctx, "corpus")));
}

}  // namespace sda
