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

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sda/backends.hpp"
#include "sda/dataset.hpp"
#include "sda/extractor.hpp"
#include "sda/metrics.hpp"

namespace sda {

struct ExperimentPaths {
  std::filesystem::path corpus;
  CorpusFormat corpus_format = CorpusFormat::kCsv;
  std::filesystem::path templates_dir;
  std::filesystem::path workdir;
};

// The single JSON document driving a run. Relative paths resolve against the
// directory holding the config file. Secrets are referenced by environment
// variable name only.
struct ExperimentConfig {
  BackendSpec text_generator;
  BackendSpec feature_generator;
  std::vector<BackendSpec> target_generators;
  BackendSpec proxy_detector;
  std::vector<BackendSpec> eval_detectors;
  BackendSpec embedder;
  BackendSpec scorer;

  ExtractionConfig extraction;
  size_t k = 5;
  SplitSpec split;
  ExperimentPaths paths;
  size_t parallelism = 8;
  size_t eval_sample_size = 200;
  GenParams generation;
  int max_retries_per_query = 3;
  std::string query_template = kAbstractQueryTemplate;
  bool use_features = true;
  bool use_retrieval = true;
  CosineMode cosine_mode = CosineMode::kPaired;

  std::filesystem::path base_dir;
  nlohmann::json document;  // as loaded, plus any CLI overrides

  static ExperimentConfig from_json(const nlohmann::json& doc,
                                    const std::filesystem::path& base_dir);
  static ExperimentConfig load(const std::string& path);

  // FNV-1a 64 over the canonical (key-sorted) dump of `document`.
  std::string hash() const;

  // Reapplies a change to `document` and re-parses, so the hash tracks it.
  ExperimentConfig with_override(const nlohmann::json::json_pointer& ptr,
                                 const nlohmann::json& value) const;

  BackendContext backend_context() const;
};

}  // namespace sda
