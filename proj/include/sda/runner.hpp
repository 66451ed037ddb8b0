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

#include <optional>
#include <string>
#include <vector>

#include "sda/config.hpp"
#include "sda/manifest.hpp"
#include "sda/metrics.hpp"

namespace sda {

// Fixed file names inside the workdir.
struct WorkdirLayout {
  std::filesystem::path root;

  std::filesystem::path manifest() const { return root / "manifest.json"; }
  std::filesystem::path features() const { return root / "features.json"; }
  std::filesystem::path trace() const { return root / "trace.jsonl"; }
  std::filesystem::path kb() const { return root / "kb.jsonl"; }
  std::filesystem::path kb_skipped() const { return root / "kb_skipped.jsonl"; }
  std::filesystem::path generated(const std::string& arm,
                                  const std::string& split) const {
    return root / ("generated_" + arm + "_" + split + ".jsonl");
  }
  std::filesystem::path metrics(const std::string& arm,
                                const std::string& target) const {
    return root / ("metrics_" + arm + "_" + target + ".json");
  }
  std::filesystem::path projection(const std::string& arm,
                                   const std::string& target) const {
    return root / ("projection_" + arm + "_" + target + ".csv");
  }
};

// Corpus, queries, and the seeded split, as every stage sees them.
struct PreparedData {
  std::vector<CorpusRecord> records;
  Split<Query> queries;
};

PreparedData prepare_data(const ExperimentConfig& cfg);

struct ExtractOptions {
  bool force = false;
  std::optional<int> max_iterations;
};

struct ExtractOutputs {
  std::string features_path;
  std::string trace_path;
  TerminalReason terminal_reason;
  int feature_version;
};

// Refuses to overwrite outputs recorded for the same config hash unless
// `force` is set.
ExtractOutputs cmd_extract_features(const ExperimentConfig& cfg,
                                    const ExtractOptions& options = {});

struct BuildKbOutputs {
  std::string kb_path;
  std::string skipped_path;
  size_t admitted;
  size_t skipped;
};

BuildKbOutputs cmd_build_kb(const ExperimentConfig& cfg,
                            const std::string& features_path);

enum class SplitName { kVal, kTest };
SplitName parse_split_name(const std::string& s);

struct GenerateOptions {
  std::optional<std::string> features_path;
  std::optional<std::string> kb_path;
  SplitName split = SplitName::kTest;
  std::optional<size_t> k;
  bool no_features = false;
  bool no_retrieval = false;
};

struct GeneratedRecord {
  std::string query_id;
  std::string target_id;
  std::string arm;
  std::string text;
  std::string prompt_parts_digest;
  size_t n_examples = 0;

  bool operator==(const GeneratedRecord&) const = default;
};

std::string generated_to_jsonl(const std::vector<GeneratedRecord>& records);
std::vector<GeneratedRecord> generated_from_jsonl(const std::string& contents,
                                                  const std::string& path);

// Arm name for a features/retrieval combination: sda, features-only,
// retrieval-only, direct.
std::string arm_name(bool use_features, bool use_retrieval);

struct GenerateOutputs {
  std::string generated_path;
  std::string arm;
  size_t n_records;
};

GenerateOutputs cmd_generate(const ExperimentConfig& cfg,
                             const GenerateOptions& options);

struct EvaluateOutputs {
  std::vector<std::string> metrics_paths;
  std::vector<MetricsReport> reports;
  bool detector_failure = false;
};

// One report per target generator found in the generated file. A failing
// detector yields an explicit null accuracy and detector_failure = true.
EvaluateOutputs cmd_evaluate(const ExperimentConfig& cfg,
                             const std::string& generated_path);

struct ReportOutputs {
  std::string table;
  std::string csv;
};

// Rows are reports, columns their detectors plus Average. All reports must
// share one detector set.
ReportOutputs render_report(const std::vector<MetricsReport>& reports);
ReportOutputs cmd_report(const std::vector<std::string>& metrics_paths);

}  // namespace sda
