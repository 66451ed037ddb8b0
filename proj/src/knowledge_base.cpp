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

#include "sda/knowledge_base.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>

#include "sda/error.hpp"
#include "sda/parallel.hpp"
#include "sda/text_util.hpp"

namespace sda {

using nlohmann::json;

KbBuildResult build_kb(const std::vector<Query>& train_queries,
                       const TextGenerator& generator,
                       const DisguiseFeatureSet& features,
                       const Detector& detector, const PromptLibrary& prompts,
                       const KbBuildConfig& cfg) {
  if (train_queries.empty()) throw UsageError("build_kb: no training queries");
  if (cfg.max_retries_per_query < 1) {
    throw UsageError("max_retries_per_query must be >= 1");
  }
  features.validate();

  struct Attempt {
    std::optional<GeneratedText> admitted;
    double probability = 0.0;
    int attempts = 0;
  };

  auto attempts = parallel_map(train_queries.size(), cfg.parallelism, [&](size_t i) {
    const Query& q = train_queries[i];
    const PromptBundle prompt =
        prompts.render_disguise_prompt(q.text, features, {}, q.query_id);
    Attempt a;
    for (int n = 0; n < cfg.max_retries_per_query; ++n) {
      GenParams params = cfg.generation;
      params.seed = cfg.generation.seed.value_or(0) + static_cast<uint64_t>(n);
      GeneratedText g = generator.generate(prompt.final_text, params, q.query_id);
      DetectionResult d = detector.detect(g.text, cfg.sigma);
      a.attempts = n + 1;
      a.probability = d.probability;
      if (d.probability < cfg.sigma) {
        a.admitted = std::move(g);
        break;
      }
    }
    return a;
  });

  KbBuildResult result;
  for (size_t i = 0; i < attempts.size(); ++i) {
    Attempt& a = attempts[i];
    if (!a.admitted) {
      result.skipped.push_back(
          {train_queries[i].query_id, a.attempts, a.probability});
      continue;
    }
    result.pairs.push_back({static_cast<int64_t>(result.pairs.size() + 1),
                            train_queries[i].text, std::move(a.admitted->text),
                            a.probability, features.version});
  }
  if (result.pairs.empty()) {
    throw InvariantError("knowledge base is empty: no response evaded the detector (" +
                         std::to_string(result.skipped.size()) + " queries skipped)");
  }
  return result;
}

double l2_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

VectorIndex::VectorIndex(size_t dimension, std::string embedder_id,
                         std::vector<Entry> entries)
    : dimension_(dimension),
      embedder_id_(std::move(embedder_id)),
      entries_(std::move(entries)) {
  std::set<int64_t> ids;
  for (const auto& e : entries_) {
    if (e.vector.dimension() != dimension_) {
      throw InvariantError("index entry " + std::to_string(e.id) +
                           " has dimension " + std::to_string(e.vector.dimension()));
    }
    if (!ids.insert(e.id).second) {
      throw InvariantError("duplicate index id " + std::to_string(e.id));
    }
  }
}

std::vector<VectorIndex::Neighbor> VectorIndex::nearest(const EmbeddingVector& probe,
                                                        size_t k) const {
  if (probe.dimension() != dimension_) {
    throw InvariantError("probe dimension " + std::to_string(probe.dimension()) +
                         " does not match index dimension " +
                         std::to_string(dimension_));
  }
  std::vector<Neighbor> all;
  all.reserve(entries_.size());
  for (const auto& e : entries_) {
    all.push_back({e.id, l2_distance(probe.values(), e.vector.values())});
  }
  const size_t take = std::min(k, all.size());
  auto closer = [](const Neighbor& a, const Neighbor& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.id < b.id;
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take),
                    all.end(), closer);
  all.resize(take);
  return all;
}

VectorIndex index_kb(const std::vector<KnowledgePair>& pairs,
                     const Embedder& embedder, size_t parallelism) {
  if (pairs.empty()) throw UsageError("index_kb: no knowledge pairs");
  auto vectors = parallel_map(pairs.size(), parallelism, [&](size_t i) {
    return embedder.embed(pairs[i].query);
  });
  std::vector<VectorIndex::Entry> entries;
  entries.reserve(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    entries.push_back({pairs[i].id, std::move(vectors[i])});
  }
  const size_t dim = entries.front().vector.dimension();
  return VectorIndex(dim, embedder.id(), std::move(entries));
}

std::vector<int64_t> knn(const VectorIndex& index, const EmbeddingVector& probe,
                         size_t k) {
  std::vector<int64_t> ids;
  for (const auto& n : index.nearest(probe, k)) ids.push_back(n.id);
  return ids;
}

std::vector<std::string> retrieve_examples(const VectorIndex& index,
                                           const std::vector<KnowledgePair>& pairs,
                                           std::string_view query_text,
                                           const Embedder& embedder, size_t k) {
  if (k == 0) return {};
  std::unordered_map<int64_t, const KnowledgePair*> by_id;
  for (const auto& p : pairs) by_id[p.id] = &p;
  std::vector<std::string> out;
  for (int64_t id : knn(index, embedder.embed(query_text), k)) {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw InvariantError("index id " + std::to_string(id) + " has no knowledge pair");
    }
    out.push_back(it->second->response);
  }
  return out;
}

std::string kb_to_jsonl(const std::vector<KnowledgePair>& pairs) {
  std::string out;
  for (const auto& p : pairs) {
    json j = {{"id", p.id},
              {"query", p.query},
              {"response", p.response},
              {"detector_probability", p.detector_probability},
              {"feature_version", p.feature_version}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<KnowledgePair> kb_from_jsonl(const std::string& contents,
                                         const std::string& path) {
  std::vector<KnowledgePair> pairs;
  std::set<int64_t> ids;
  std::istringstream in(contents);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_blank(line)) {
      throw ParseError(path, line_no, "blank line in knowledge base");
    }
    KnowledgePair p;
    try {
      json j = json::parse(line);
      p.id = j.at("id").get<int64_t>();
      p.query = j.at("query").get<std::string>();
      p.response = j.at("response").get<std::string>();
      p.detector_probability = j.at("detector_probability").get<double>();
      p.feature_version = j.at("feature_version").get<int>();
    } catch (const json::exception& e) {
      throw ParseError(path, line_no, e.what());
    }
    if (!ids.insert(p.id).second) {
      throw ParseError(path, line_no, "duplicate id " + std::to_string(p.id));
    }
    pairs.push_back(std::move(p));
  }
  if (pairs.empty()) throw ParseError(path, 1, "knowledge base file is empty");
  return pairs;
}

void save_kb(const std::string& path, const std::vector<KnowledgePair>& pairs) {
  text::write_file_atomic(path, kb_to_jsonl(pairs));
}

std::vector<KnowledgePair> load_kb(const std::string& path) {
  return kb_from_jsonl(text::read_file(path), path);
}

std::string skipped_to_jsonl(const std::vector<SkippedQuery>& skipped) {
  std::string out;
  for (const auto& s : skipped) {
    json j = {{"query_id", s.query_id},
              {"attempts", s.attempts},
              {"last_probability", s.last_probability}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace sda
