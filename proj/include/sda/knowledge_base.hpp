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
#include <string>
#include <vector>

#include "sda/backends.hpp"
#include "sda/dataset.hpp"
#include "sda/features.hpp"
#include "sda/prompting.hpp"

namespace sda {

// A query and a response the proxy detector did not flag.
struct KnowledgePair {
  int64_t id = 0;
  std::string query;
  std::string response;
  double detector_probability = 0.0;
  int feature_version = 0;

  bool operator==(const KnowledgePair&) const = default;
};

struct SkippedQuery {
  std::string query_id;
  int attempts = 0;
  double last_probability = 0.0;
};

struct KbBuildConfig {
  double sigma = 0.5;
  int max_retries_per_query = 3;
  size_t parallelism = 8;
  GenParams generation;
};

struct KbBuildResult {
  std::vector<KnowledgePair> pairs;
  std::vector<SkippedQuery> skipped;
};

// Generates each query's response with the disguise prompt (features, no
// examples) and admits the first attempt with probability < sigma. Attempt a
// (0-based) uses seed generation.seed + a. Queries with no evasive attempt are
// skipped and reported. Pair ids are 1-based in query order. Throws
// InvariantError when nothing is admitted.
KbBuildResult build_kb(const std::vector<Query>& train_queries,
                       const TextGenerator& generator,
                       const DisguiseFeatureSet& features,
                       const Detector& detector, const PromptLibrary& prompts,
                       const KbBuildConfig& cfg);

// Exact L2 index over query embeddings. Immutable once built.
class VectorIndex {
 public:
  struct Entry {
    int64_t id;
    EmbeddingVector vector;
  };

  VectorIndex(size_t dimension, std::string embedder_id, std::vector<Entry> entries);

  size_t dimension() const { return dimension_; }
  size_t size() const { return entries_.size(); }
  const std::string& embedder_id() const { return embedder_id_; }
  const std::vector<Entry>& entries() const { return entries_; }

  struct Neighbor {
    int64_t id;
    double distance;
  };

  // The k entries closest to `probe` by Euclidean distance, ascending, ties
  // by ascending id. k larger than the index returns every entry.
  std::vector<Neighbor> nearest(const EmbeddingVector& probe, size_t k) const;

 private:
  size_t dimension_;
  std::string embedder_id_;
  std::vector<Entry> entries_;
};

// Euclidean distance, accumulated in coordinate order.
double l2_distance(const std::vector<double>& a, const std::vector<double>& b);

// Embeds each pair's query (not its response).
VectorIndex index_kb(const std::vector<KnowledgePair>& pairs,
                     const Embedder& embedder, size_t parallelism = 8);

std::vector<int64_t> knn(const VectorIndex& index, const EmbeddingVector& probe,
                         size_t k);

// Responses of the k pairs whose queries lie closest to `query_text`.
std::vector<std::string> retrieve_examples(const VectorIndex& index,
                                           const std::vector<KnowledgePair>& pairs,
                                           std::string_view query_text,
                                           const Embedder& embedder, size_t k);

// JSONL, one pair per line. Loading rejects blank files, malformed lines and
// duplicate ids, naming the offending line.
std::string kb_to_jsonl(const std::vector<KnowledgePair>& pairs);
std::vector<KnowledgePair> kb_from_jsonl(const std::string& contents,
                                         const std::string& path_for_errors);
void save_kb(const std::string& path, const std::vector<KnowledgePair>& pairs);
std::vector<KnowledgePair> load_kb(const std::string& path);

std::string skipped_to_jsonl(const std::vector<SkippedQuery>& skipped);

}  // namespace sda
