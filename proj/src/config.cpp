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

#include "sda/config.hpp"

#include "sda/error.hpp"
#include "sda/hashing.hpp"
#include "sda/text_util.hpp"

namespace sda {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

BackendSpec backend_at(const json& backends, const char* key) {
  if (!backends.contains(key)) {
    throw UsageError(std::string("config: backends.") + key + " is required");
  }
  return BackendSpec::from_json(backends[key]);
}

std::vector<BackendSpec> backend_list(const json& backends, const char* key) {
  if (!backends.contains(key) || !backends[key].is_array() || backends[key].empty()) {
    throw UsageError(std::string("config: backends.") + key +
                     " must be a non-empty array");
  }
  std::vector<BackendSpec> out;
  for (const auto& j : backends[key]) out.push_back(BackendSpec::from_json(j));
  return out;
}

void expect_role(const BackendSpec& spec, BackendRole role, const char* slot) {
  if (role_of(spec.kind) != role) {
    throw UsageError(std::string("config: backend '") + spec.id + "' in " + slot +
                     " has the wrong kind " + std::string(to_string(spec.kind)));
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_relative() ? (base / path).lexically_normal() : path;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw UsageError("config must be a JSON object");
  ExperimentConfig c;
  c.document = doc;
  c.base_dir = base_dir;
  try {
    const json& b = doc.at("backends");
    c.text_generator = backend_at(b, "text_generator");
    c.feature_generator = backend_at(b, "feature_generator");
    c.target_generators = backend_list(b, "target_generators");
    c.proxy_detector = backend_at(b, "proxy_detector");
    c.eval_detectors = backend_list(b, "eval_detectors");
    c.embedder = backend_at(b, "embedder");
    c.scorer = backend_at(b, "scorer");

    c.parallelism = doc.value("parallelism", c.parallelism);
    if (c.parallelism < 1) throw UsageError("config: parallelism must be >= 1");
    json extraction = doc.value("extraction", json::object());
    if (!extraction.contains("parallelism")) extraction["parallelism"] = c.parallelism;
    c.extraction = ExtractionConfig::from_json(extraction);

    const json retrieval = doc.value("retrieval", json::object());
    const long long k = retrieval.value("k", 5LL);
    if (k < 0) throw UsageError("config: retrieval.k must be >= 0");
    c.k = static_cast<size_t>(k);

    const json split = doc.value("split", json::object());
    if (split.contains("ratios")) {
      c.split.ratios = split["ratios"].get<std::array<int, 3>>();
    }
    c.split.seed = split.value("seed", c.split.seed);
    c.split.validate();

    const json& paths = doc.at("paths");
    c.paths.corpus = resolve(base_dir, paths.at("corpus").get<std::string>());
    c.paths.corpus_format = parse_corpus_format(paths.value("corpus_format", "csv"));
    c.paths.templates_dir = resolve(base_dir, paths.at("templates_dir").get<std::string>());
    c.paths.workdir = resolve(base_dir, paths.at("workdir").get<std::string>());

    c.eval_sample_size = doc.value("eval_sample_size", c.eval_sample_size);
    if (c.eval_sample_size < 1) throw UsageError("config: eval_sample_size must be >= 1");
    if (doc.contains("generation")) c.generation = GenParams::from_json(doc["generation"]);
    c.max_retries_per_query = doc.value("max_retries_per_query", c.max_retries_per_query);
    if (c.max_retries_per_query < 1) {
      throw UsageError("config: max_retries_per_query must be >= 1");
    }
    c.query_template = doc.value("query_template", c.query_template);
    if (c.query_template.find("{title}") == std::string::npos) {
      throw UsageError("config: query_template must contain {title}");
    }
    const json ablation = doc.value("ablation", json::object());
    c.use_features = ablation.value("use_features", true);
    c.use_retrieval = ablation.value("use_retrieval", true);
    c.cosine_mode = parse_cosine_mode(
        doc.value("metrics", json::object()).value("cosine_mode", "paired"));
  } catch (const json::exception& e) {
    throw UsageError(std::string("invalid config: ") + e.what());
  }

  expect_role(c.text_generator, BackendRole::kGenerator, "text_generator");
  expect_role(c.feature_generator, BackendRole::kGenerator, "feature_generator");
  for (const auto& t : c.target_generators) {
    expect_role(t, BackendRole::kGenerator, "target_generators");
  }
  expect_role(c.proxy_detector, BackendRole::kDetector, "proxy_detector");
  for (const auto& d : c.eval_detectors) {
    expect_role(d, BackendRole::kDetector, "eval_detectors");
  }
  expect_role(c.embedder, BackendRole::kEmbedder, "embedder");
  expect_role(c.scorer, BackendRole::kScorer, "scorer");

  if (!fs::exists(c.paths.corpus)) {
    throw UsageError("config: corpus " + c.paths.corpus.string() + " does not exist");
  }
  if (!fs::is_directory(c.paths.templates_dir)) {
    throw UsageError("config: templates_dir " + c.paths.templates_dir.string() +
                     " is not a directory");
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  json doc;
  try {
    doc = json::parse(text::read_file(path));
  } catch (const json::parse_error& e) {
    throw UsageError("config " + path + ": " + e.what());
  }
  fs::path base = fs::absolute(fs::path(path)).parent_path();
  return from_json(doc, base);
}

std::string ExperimentConfig::hash() const { return hex64(fnv1a64(document.dump())); }

ExperimentConfig ExperimentConfig::with_override(const json::json_pointer& ptr,
                                                 const json& value) const {
  json doc = document;
  doc[ptr] = value;
  return from_json(doc, base_dir);
}

BackendContext ExperimentConfig::backend_context() const {
  BackendContext ctx;
  ctx.base_dir = base_dir;
  ctx.transport = make_http_transport();
  return ctx;
}

}  // namespace sda
