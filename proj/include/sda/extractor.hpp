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

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sda/backends.hpp"
#include "sda/dataset.hpp"
#include "sda/features.hpp"
#include "sda/prompting.hpp"

namespace sda {

enum class TerminationMode {
  kCount,       // both of the last two detected counts <= delta
  kDifference,  // |last - previous| <= delta
};

enum class TerminalReason { kConverged, kMaxIterations, kQueryExhaustion };

std::string_view to_string(TerminalReason r);
TerminalReason parse_terminal_reason(std::string_view s);

struct ExtractionConfig {
  int eta = 5;          // evasive examples per feature update
  int delta = 2;        // detected-count ceiling for convergence
  double sigma = 0.5;   // detection threshold
  int max_iterations = 50;
  std::vector<std::string> characteristics = {
      "syntactic structure", "grammatical structure", "language style",
      "punctuation usage", "vocabulary choice"};
  size_t batch_size = 10;       // queries per iteration
  bool wraparound = true;       // reuse queries cyclically
  TerminationMode termination = TerminationMode::kCount;
  size_t max_feature_chars = 4000;
  size_t parallelism = 8;
  GenParams generation;         // text generator
  GenParams feature_generation; // feature generator

  void validate() const;
  static ExtractionConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct IterationRecord {
  int iteration = 0;
  std::vector<std::string> queries_used;
  int detected_count = 0;
  int evasive_collected = 0;
  int feature_version_after = 0;

  bool operator==(const IterationRecord&) const = default;
};

struct ExtractionTrace {
  std::vector<IterationRecord> iterations;
  TerminalReason terminal_reason = TerminalReason::kMaxIterations;

  std::vector<int> detected_history() const;
};

// One JSON object per iteration; the last also carries "terminal_reason".
std::string trace_to_jsonl(const ExtractionTrace& trace);
ExtractionTrace trace_from_jsonl(const std::string& contents,
                                 const std::string& path_for_errors);

bool should_terminate(std::span<const int> detected_history, int delta,
                      TerminationMode mode = TerminationMode::kCount);

// Asks the feature generator for a new feature description from evasive
// examples. The result is current.version + 1. Throws BackendError when the
// generator returns nothing usable and UsageError when the text exceeds
// max_chars (never truncated).
DisguiseFeatureSet update_features(const TextGenerator& feature_gen,
                                   const PromptLibrary& prompts,
                                   const std::vector<GeneratedText>& examples,
                                   const DisguiseFeatureSet& current,
                                   const std::vector<std::string>& characteristics,
                                   const GenParams& params,
                                   size_t max_chars = 4000);

struct ExtractionResult {
  DisguiseFeatureSet features;
  ExtractionTrace trace;
  // Every feature set produced, version 0 first.
  std::vector<DisguiseFeatureSet> history;
};

// The adversarial loop. Each iteration generates a response for the next
// batch of queries under the current features and runs the proxy detector
// on it. Responses the detector misses accumulate; every eta of them trigger
// a feature update, after which generation continues with the new features.
// Generation never overlaps an update. Stops once two consecutive iterations
// satisfy the termination rule, at max_iterations, or when queries run out
// in no-wraparound mode.
//
// Takes only queries: no human-written reference text enters the loop.
ExtractionResult run_extraction(const std::vector<Query>& queries,
                                const TextGenerator& generator,
                                const TextGenerator& feature_gen,
                                const Detector& detector,
                                const PromptLibrary& prompts,
                                const ExtractionConfig& cfg);

}  // namespace sda
