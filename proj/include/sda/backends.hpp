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

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "sda/http.hpp"

namespace sda {

struct GenParams {
  double temperature = 1.0;
  int max_tokens = 1024;
  // Honored only by deterministic backends.
  std::optional<uint64_t> seed;

  void validate() const;
  static GenParams from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct GeneratedText {
  std::string text;
  std::string backend_id;
  std::string query_id;
};

struct DetectionResult {
  double probability = 0.0;
  bool is_ai = false;
  std::string detector_id;
};

// Unit-L2 vector of fixed dimension. Only constructible through normalize(),
// so a zero vector can never exist.
class EmbeddingVector {
 public:
  static EmbeddingVector normalize(std::vector<double> raw);

  const std::vector<double>& values() const { return values_; }
  size_t dimension() const { return values_.size(); }
  double dot(const EmbeddingVector& other) const;

  bool operator==(const EmbeddingVector&) const = default;

 private:
  explicit EmbeddingVector(std::vector<double> values)
      : values_(std::move(values)) {}
  std::vector<double> values_;
};

enum class BackendKind {
  kHttpChat,
  kMockGenerator,
  kHttpDetector,
  kBuiltinDetector,
  kHttpEmbedder,
  kBuiltinEmbedder,
  kHttpScorer,
  kBuiltinScorer,
};

enum class BackendRole { kGenerator, kDetector, kEmbedder, kScorer };

std::string_view to_string(BackendKind kind);
BackendKind parse_backend_kind(std::string_view name);
BackendRole role_of(BackendKind kind);
bool is_http(BackendKind kind);

struct BackendSpec {
  std::string id;
  BackendKind kind = BackendKind::kMockGenerator;
  std::optional<std::string> endpoint;
  std::optional<std::string> model_id;
  std::optional<std::string> auth_env_var;
  // Kind-specific settings, e.g. fixture paths for mock/builtin backends or
  // the embedding dimension.
  nlohmann::json options = nlohmann::json::object();

  // http kinds require an endpoint; builtin and mock kinds forbid one.
  void validate() const;
  static BackendSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Interfaces. All implementations are immutable after construction and safe
// to share between threads.

class TextGenerator {
 public:
  virtual ~TextGenerator() = default;
  const std::string& id() const { return id_; }

  // Throws on an empty prompt and on an empty completion.
  GeneratedText generate(std::string_view prompt, const GenParams& params,
                         std::string_view query_id = {}) const;

 protected:
  explicit TextGenerator(std::string id) : id_(std::move(id)) {}
  virtual std::string complete(std::string_view prompt,
                               const GenParams& params) const = 0;

 private:
  std::string id_;
};

class Detector {
 public:
  virtual ~Detector() = default;
  const std::string& id() const { return id_; }

  // `sigma` must lie in (0, 1); is_ai = probability >= sigma.
  DetectionResult detect(std::string_view text, double sigma) const;

 protected:
  explicit Detector(std::string id) : id_(std::move(id)) {}
  virtual double probability_ai(std::string_view text) const = 0;

 private:
  std::string id_;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  const std::string& id() const { return id_; }

  // Rejects whitespace-only text. The result is always re-normalized.
  EmbeddingVector embed(std::string_view text) const;

 protected:
  explicit Embedder(std::string id) : id_(std::move(id)) {}
  virtual std::vector<double> raw_embedding(std::string_view text) const = 0;

 private:
  std::string id_;
};

class PerplexityScorer {
 public:
  virtual ~PerplexityScorer() = default;
  const std::string& id() const { return id_; }
  virtual double score_perplexity(std::string_view text) const = 0;

 protected:
  explicit PerplexityScorer(std::string id) : id_(std::move(id)) {}

 private:
  std::string id_;
};

// ---------------------------------------------------------------------------
// Built-in and mock implementations.

inline constexpr std::string_view kFeaturesMarker = "FEATURES-ACTIVE";

// Emits from the human-like pool exactly when the prompt contains the
// FEATURES-ACTIVE marker, otherwise from the machine-like pool. The pool
// index is fnv1a64(prompt) chained with the seed's 8 LE bytes, mod pool size.
// In fixed-response mode every call returns the same text.
class MockGenerator : public TextGenerator {
 public:
  MockGenerator(std::string id, std::vector<std::string> machine_pool,
                std::vector<std::string> human_pool);
  static std::unique_ptr<MockGenerator> fixed(std::string id, std::string text);

  static uint64_t pool_hash(std::string_view prompt, uint64_t seed);

 protected:
  std::string complete(std::string_view prompt,
                       const GenParams& params) const override;

 private:
  std::vector<std::string> machine_pool_;
  std::vector<std::string> human_pool_;
  std::optional<std::string> fixed_;
};

// Surface statistics the built-in detector scores.
struct StyleFeatures {
  double comma_rate = 0.0;       // commas per word
  double pronoun_rate = 0.0;     // first-person pronouns per 100 words
  double mean_sentence_length = 0.0;  // words per sentence
};

StyleFeatures extract_style_features(std::string_view text);

// Logistic model over StyleFeatures:
//   p = 1 / (1 + exp(-(2.0 - 40.0*c - 0.8*p + 0.05*s)))
class BuiltinDetector : public Detector {
 public:
  static constexpr double kBias = 2.0;
  static constexpr double kCommaWeight = -40.0;
  static constexpr double kPronounWeight = -0.8;
  static constexpr double kSentenceLengthWeight = 0.05;

  explicit BuiltinDetector(std::string id) : Detector(std::move(id)) {}

 protected:
  double probability_ai(std::string_view text) const override;
};

// Character-trigram hashing embedder (FNV-1a 64, bucket = hash mod D) over
// the lowercased text padded with kBoundary on each side.
class BuiltinEmbedder : public Embedder {
 public:
  static constexpr char kBoundary = '\x02';
  static constexpr size_t kDefaultDimension = 256;

  BuiltinEmbedder(std::string id, size_t dimension);
  size_t dimension() const { return dimension_; }

  // Bucket counts before normalization.
  std::vector<double> bucket_counts(std::string_view text) const;

 protected:
  std::vector<double> raw_embedding(std::string_view text) const override;

 private:
  size_t dimension_;
};

// Add-one smoothed unigram model over whitespace tokens. Vocabulary is the
// training tokens plus one reserved unknown token, so
//   p(w) = (count(w) + 1) / (N + |V| + 1).
class UnigramScorer : public PerplexityScorer {
 public:
  UnigramScorer(std::string id, std::string_view training_corpus);

  double probability(std::string_view token) const;
  double score_perplexity(std::string_view text) const override;

 private:
  std::unordered_map<std::string, size_t> counts_;
  size_t total_tokens_ = 0;
};

// ---------------------------------------------------------------------------
// HTTP implementations. Wire formats:
//   chat:     {"model","messages":[{"role","content"}],"temperature","max_tokens"}
//             -> {"choices":[{"message":{"content"}}]}
//   detector: {"text"} -> {"probability_ai"}
//   embedder: {"text"} -> {"embedding":[...]}
//   scorer:   {"text"} -> {"perplexity"}

struct HttpEndpoint {
  std::string url;
  std::optional<std::string> auth_env_var;
  std::shared_ptr<HttpTransport> transport;
  RetryPolicy retry;

  // POSTs JSON and parses the JSON response body.
  nlohmann::json call(const nlohmann::json& request) const;
};

class HttpChatGenerator : public TextGenerator {
 public:
  HttpChatGenerator(std::string id, HttpEndpoint endpoint, std::string model,
                    std::optional<std::string> system_prompt = std::nullopt);

  nlohmann::json build_request(std::string_view prompt,
                               const GenParams& params) const;

 protected:
  std::string complete(std::string_view prompt,
                       const GenParams& params) const override;

 private:
  HttpEndpoint endpoint_;
  std::string model_;
  std::optional<std::string> system_prompt_;
};

class HttpDetector : public Detector {
 public:
  HttpDetector(std::string id, HttpEndpoint endpoint);

 protected:
  double probability_ai(std::string_view text) const override;

 private:
  HttpEndpoint endpoint_;
};

class HttpEmbedder : public Embedder {
 public:
  // `dimension` of 0 accepts whatever length the server returns.
  HttpEmbedder(std::string id, HttpEndpoint endpoint, size_t dimension);

 protected:
  std::vector<double> raw_embedding(std::string_view text) const override;

 private:
  HttpEndpoint endpoint_;
  size_t dimension_;
};

class HttpScorer : public PerplexityScorer {
 public:
  HttpScorer(std::string id, HttpEndpoint endpoint);
  double score_perplexity(std::string_view text) const override;

 private:
  HttpEndpoint endpoint_;
};

// ---------------------------------------------------------------------------
// Construction from specs. Relative fixture paths in `options` resolve
// against `base_dir`.

struct BackendContext {
  std::filesystem::path base_dir = ".";
  std::shared_ptr<HttpTransport> transport;
  RetryPolicy retry = RetryPolicy::standard();
};

std::shared_ptr<const TextGenerator> make_generator(const BackendSpec& spec,
                                                    const BackendContext& ctx);
std::shared_ptr<const Detector> make_detector(const BackendSpec& spec,
                                              const BackendContext& ctx);
std::shared_ptr<const Embedder> make_embedder(const BackendSpec& spec,
                                              const BackendContext& ctx);
std::shared_ptr<const PerplexityScorer> make_scorer(const BackendSpec& spec,
                                                    const BackendContext& ctx);

}  // namespace sda
