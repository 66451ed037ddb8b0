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

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sda/error.hpp"
#include "sda/runner.hpp"
#include "sda/text_util.hpp"

namespace {

int run(int argc, char** argv) {
  CLI::App app{"Self-disguise attack pipeline: feature extraction, knowledge base, "
               "generation and evaluation"};
  app.require_subcommand(1);

  std::string config_path;
  bool force = false;
  std::optional<int> max_iterations;
  auto* extract = app.add_subcommand("extract-features", "Run the adversarial feature loop");
  extract->add_option("--config", config_path, "Experiment config JSON")->required();
  extract->add_flag("--force", force, "Overwrite existing outputs for this config");
  extract->add_option("--max-iterations", max_iterations, "Override extraction.max_iterations")
      ->check(CLI::PositiveNumber);

  std::string features_path;
  auto* build = app.add_subcommand("build-kb", "Build the knowledge base of evasive responses");
  build->add_option("--config", config_path, "Experiment config JSON")->required();
  build->add_option("--features", features_path, "Disguise features JSON")->required();

  std::optional<std::string> gen_features;
  std::optional<std::string> gen_kb;
  std::string split_name = "test";
  std::optional<size_t> k;
  bool no_features = false;
  bool no_retrieval = false;
  auto* generate = app.add_subcommand("generate", "Generate texts with self-disguise prompts");
  generate->add_option("--config", config_path, "Experiment config JSON")->required();
  generate->add_option("--features", gen_features, "Disguise features JSON");
  generate->add_option("--kb", gen_kb, "Knowledge base JSONL");
  generate->add_option("--split", split_name, "Query split to generate for")
      ->check(CLI::IsMember({"val", "test"}));
  generate->add_option("--k", k, "Override retrieval.k");
  generate->add_flag("--no-features", no_features, "Omit the features section");
  generate->add_flag("--no-retrieval", no_retrieval, "Omit retrieved examples");

  std::string generated_path;
  auto* evaluate = app.add_subcommand("evaluate", "Score generated texts");
  evaluate->add_option("--config", config_path, "Experiment config JSON")->required();
  evaluate->add_option("--generated", generated_path, "Generated texts JSONL")->required();

  std::vector<std::string> metrics_paths;
  std::optional<std::string> csv_path;
  auto* report = app.add_subcommand("report", "Render metrics files as a table");
  report->add_option("files", metrics_paths, "Metrics JSON files")->required()->check(CLI::ExistingFile);
  report->add_option("--csv", csv_path, "Also write the table as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  if (*extract) {
    auto cfg = sda::ExperimentConfig::load(config_path);
    auto out = sda::cmd_extract_features(cfg, {force, max_iterations});
    std::cout << "features: " << out.features_path << " (version " << out.feature_version
              << ")\ntrace: " << out.trace_path << " ("
              << sda::to_string(out.terminal_reason) << ")\n";
  } else if (*build) {
    auto cfg = sda::ExperimentConfig::load(config_path);
    auto out = sda::cmd_build_kb(cfg, features_path);
    std::cout << "kb: " << out.kb_path << " (" << out.admitted << " pairs, " << out.skipped
              << " skipped)\n";
  } else if (*generate) {
    auto cfg = sda::ExperimentConfig::load(config_path);
    sda::GenerateOptions opts;
    opts.features_path = gen_features;
    opts.kb_path = gen_kb;
    opts.split = sda::parse_split_name(split_name);
    opts.k = k;
    opts.no_features = no_features;
    opts.no_retrieval = no_retrieval;
    auto out = sda::cmd_generate(cfg, opts);
    std::cout << "generated: " << out.generated_path << " (" << out.arm << ", "
              << out.n_records << " records)\n";
  } else if (*evaluate) {
    auto cfg = sda::ExperimentConfig::load(config_path);
    auto out = sda::cmd_evaluate(cfg, generated_path);
    for (const auto& p : out.metrics_paths) std::cout << "metrics: " << p << "\n";
    if (out.detector_failure) return static_cast<int>(sda::ErrorKind::kBackend);
  } else if (*report) {
    auto out = sda::cmd_report(metrics_paths);
    std::cout << out.table;
    if (csv_path) sda::text::write_file_atomic(*csv_path, out.csv);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const sda::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(sda::ErrorKind::kInvariant);
  }
}
