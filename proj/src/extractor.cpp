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

#include "sda/extractor.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "sda/error.hpp"
#include "sda/parallel.hpp"
#include "sda/text_util.hpp"

namespace sda {

using nlohmann::json;

std::string_view to_string(TerminalReason r) {
  switch (r) {
    case TerminalReason::kConverged:
      return "converged";
    case TerminalReason::kMaxIterations:
      return "max_iterations";
    case TerminalReason::kQueryExhaustion:
      return "query_exhaustion";
  }
  return "unknown";
}

TerminalReason parse_terminal_reason(std::string_view s) {
  if (s == "converged") return TerminalReason::kConverged;
  if (s == "max_iterations") return TerminalReason::kMaxIterations;
  if (s == "query_exhaustion") return TerminalReason::kQueryExhaustion;
  throw UsageError("unknown terminal reason '" + std::string(s) + "'");
}

void ExtractionConfig::validate() const {
  if (eta < 1) throw UsageError("eta must be >= 1");
  if (delta < 0) throw UsageError("delta must be >= 0");
  if (!(sigma > 0.0 && sigma < 1.0)) throw UsageError("sigma must lie in (0, 1)");
  if (max_iterations < 1) throw UsageError("max_iterations must be >= 1");
  if (characteristics.empty()) throw UsageError("characteristics must be non-empty");
  if (batch_size < 1) throw UsageError("batch_size must be >= 1");
  if (parallelism < 1) throw UsageError("parallelism must be >= 1");
  if (max_feature_chars < 1) throw UsageError("max_feature_chars must be >= 1");
  generation.validate();
  feature_generation.validate();
}

ExtractionConfig ExtractionConfig::from_json(const json& j) {
  ExtractionConfig c;
  try {
    c.eta = j.value("eta", c.eta);
    c.delta = j.value("delta", c.delta);
    c.sigma = j.value("sigma", c.sigma);
    c.max_iterations = j.value("max_iterations", c.max_iterations);
    c.characteristics = j.value("characteristics", c.characteristics);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.wraparound = j.value("wraparound", c.wraparound);
    const std::string mode = j.value("termination", std::string("count"));
    if (mode == "count") {
      c.termination = TerminationMode::kCount;
    } else if (mode == "difference") {
      c.termination = TerminationMode::kDifference;
    } else {
      throw UsageError("termination must be 'count' or 'difference'");
    }
    c.max_feature_chars = j.value("max_feature_chars", c.max_feature_chars);
    c.parallelism = j.value("parallelism", c.parallelism);
    if (j.contains("generation")) c.generation = GenParams::from_json(j["generation"]);
    if (j.contains("feature_generation")) {
      c.feature_generation = GenParams::from_json(j["feature_generation"]);
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("invalid extraction config: ") + e.what());
  }
  c.validate();
  return c;
}

json ExtractionConfig::to_json() const {
  return {{"eta", eta},
          {"delta", delta},
          {"sigma", sigma},
          {"max_iterations", max_iterations},
          {"characteristics", characteristics},
          {"batch_size", batch_size},
          {"wraparound", wraparound},
          {"termination",
           termination == TerminationMode::kCount ? "count" : "difference"},
          {"max_feature_chars", max_feature_chars},
          {"parallelism", parallelism},
          {"generation", generation.to_json()},
          {"feature_generation", feature_generation.to_json()}};
}

std::vector<int> ExtractionTrace::detected_history() const {
  std::vector<int> h;
  h.reserve(iterations.size());
  for (const auto& r : iterations) h.push_back(r.detected_count);
  return h;
}

std::string trace_to_jsonl(const ExtractionTrace& trace) {
  std::string out;
  for (size_t i = 0; i < trace.iterations.size(); ++i) {
    const auto& r = trace.iterations[i];
    json j = {{"iteration", r.iteration},
              {"queries_used", r.queries_used},
              {"detected_count", r.detected_count},
              {"evasive_collected", r.evasive_collected},
              {"feature_version_after", r.feature_version_after}};
    if (i + 1 == trace.iterations.size()) {
      j["terminal_reason"] = std::string(to_string(trace.terminal_reason));
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

ExtractionTrace trace_from_jsonl(const std::string& contents,
                                 const std::string& path_for_errors) {
  ExtractionTrace trace;
  std::istringstream in(contents);
  std::string line;
  size_t line_no = 0;
  bool saw_terminal = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    try {
      json j = json::parse(line);
      IterationRecord r;
      r.iteration = j.at("iteration").get<int>();
      r.queries_used = j.at("queries_used").get<std::vector<std::string>>();
      r.detected_count = j.at("detected_count").get<int>();
      r.evasive_collected = j.at("evasive_collected").get<int>();
      r.feature_version_after = j.at("feature_version_after").get<int>();
      if (saw_terminal) {
        throw ParseError(path_for_errors, line_no, "record after terminal record");
      }
      if (j.contains("terminal_reason")) {
        trace.terminal_reason =
            parse_terminal_reason(j["terminal_reason"].get<std::string>());
        saw_terminal = true;
      }
      trace.iterations.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ParseError(path_for_errors, line_no, e.what());
    }
  }
  if (trace.iterations.empty() || !saw_terminal) {
    throw ParseError(path_for_errors, line_no, "trace has no terminal record");
  }
  return trace;
}

bool should_terminate(std::span<const int> detected_history, int delta,
                      TerminationMode mode) {
  if (detected_history.size() < 2) return false;
  const int last = detected_history[detected_history.size() - 1];
  const int prev = detected_history[detected_history.size() - 2];
  if (mode == TerminationMode::kDifference) return std::abs(last - prev) <= delta;
  return last <= delta && prev <= delta;
}

DisguiseFeatureSet update_features(const TextGenerator& feature_gen,
                                   const PromptLibrary& prompts,
                                   const std::vector<GeneratedText>& examples,
                                   const DisguiseFeatureSet& current,
                                   const std::vector<std::string>& characteristics,
                                   const GenParams& params, size_t max_chars) {
  std::vector<std::string> texts;
  texts.reserve(examples.size());
  for (const auto& e : examples) texts.push_back(e.text);
  const PromptBundle prompt = prompts.render_feature_prompt(texts, characteristics);

  GeneratedText out = feature_gen.generate(prompt.final_text, params);
  std::string feature_text{text::trim(out.text)};
  if (feature_text.size() > max_chars) {
    throw UsageError("feature text of " + std::to_string(feature_text.size()) +
                     " characters exceeds the limit of " +
                     std::to_string(max_chars));
  }
  DisguiseFeatureSet next;
  next.version = current.version + 1;
  next.text = std::move(feature_text);
  next.produced_by = feature_gen.id();
  next.parent_version = current.version;
  next.validate();
  return next;
}

ExtractionResult run_extraction(const std::vector<Query>& queries,
                                const TextGenerator& generator,
                                const TextGenerator& feature_gen,
                                const Detector& detector,
                                const PromptLibrary& prompts,
                                const ExtractionConfig& cfg) {
  cfg.validate();
  if (queries.empty()) throw UsageError("extraction needs at least one query");

  const size_t eta = static_cast<size_t>(cfg.eta);
  ExtractionResult result;
  result.history.push_back(result.features);
  std::vector<GeneratedText> collected;
  std::vector<int> detected_history;
  size_t cursor = 0;

  struct Outcome {
    GeneratedText text;
    bool evaded;
  };

  for (int iteration = 1;; ++iteration) {
    std::vector<const Query*> batch;
    if (cfg.wraparound) {
      for (size_t i = 0; i < cfg.batch_size; ++i) {
        batch.push_back(&queries[cursor]);
        cursor = (cursor + 1) % queries.size();
      }
    } else {
      while (batch.size() < cfg.batch_size && cursor < queries.size()) {
        batch.push_back(&queries[cursor++]);
      }
    }

    IterationRecord record;
    record.iteration = iteration;
    for (const Query* q : batch) record.queries_used.push_back(q->query_id);

    // Waves never exceed the examples still needed for the next update, so
    // an update can only fall on a wave boundary and no generation spans it.
    size_t pos = 0;
    while (pos < batch.size()) {
      const size_t wave = std::min({cfg.parallelism, batch.size() - pos,
                                    eta - collected.size()});
      const DisguiseFeatureSet& features = result.features;
      auto outcomes = parallel_map(wave, cfg.parallelism, [&](size_t i) {
        const Query& q = *batch[pos + i];
        PromptBundle prompt =
            prompts.render_generation_prompt(q.text, features, q.query_id);
        GeneratedText g = generator.generate(prompt.final_text, cfg.generation,
                                             q.query_id);
        DetectionResult d = detector.detect(g.text, cfg.sigma);
        return Outcome{std::move(g), !d.is_ai};
      });
      for (auto& o : outcomes) {
        if (o.evaded) {
          ++record.evasive_collected;
          collected.push_back(std::move(o.text));
        } else {
          ++record.detected_count;
        }
      }
      if (collected.size() == eta) {
        result.features =
            update_features(feature_gen, prompts, collected, result.features,
                            cfg.characteristics, cfg.feature_generation,
                            cfg.max_feature_chars);
        result.history.push_back(result.features);
        collected.clear();
      }
      pos += wave;
    }

    record.feature_version_after = result.features.version;
    detected_history.push_back(record.detected_count);
    result.trace.iterations.push_back(std::move(record));

    if (should_terminate(detected_history, cfg.delta, cfg.termination)) {
      result.trace.terminal_reason = TerminalReason::kConverged;
      break;
    }
    if (iteration >= cfg.max_iterations) {
      result.trace.terminal_reason = TerminalReason::kMaxIterations;
      break;
    }
    if (!cfg.wraparound && cursor >= queries.size()) {
      result.trace.terminal_reason = TerminalReason::kQueryExhaustion;
      break;
    }
  }
  return result;
}

}  // namespace sda
