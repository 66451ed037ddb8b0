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

#include "sda/runner.hpp"

#include <iostream>
#include <sstream>
#include <unordered_map>

#include "sda/error.hpp"
#include "sda/features.hpp"
#include "sda/knowledge_base.hpp"
#include "sda/parallel.hpp"
#include "sda/prompting.hpp"
#include "sda/text_util.hpp"

namespace sda {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kExtractStage = "extract-features";
constexpr const char* kBuildKbStage = "build-kb";

RunManifest open_manifest(const ExperimentConfig& cfg, const WorkdirLayout& layout) {
  fs::create_directories(layout.root);
  return RunManifest::load_or_create(layout.manifest().string(), cfg.hash());
}

void record_stage(RunManifest& manifest, const WorkdirLayout& layout,
                  const std::string& stage, const std::string& hash,
                  std::map<std::string, std::string> outputs, bool complete = true,
                  const std::string& error = {}) {
  manifest.stages[stage] = {hash, std::move(outputs), utc_timestamp(), complete, error};
  manifest.config_hash = hash;
  manifest.updated_at = utc_timestamp();
  manifest.save(layout.manifest().string());
}

void require_recorded(const RunManifest& manifest, const std::string& path,
                      const char* what) {
  if (!fs::exists(path)) throw UsageError(std::string(what) + " " + path + " does not exist");
  if (!manifest.records_output(path)) {
    throw UsageError(std::string(what) + " " + path +
                     " was not produced by a completed stage of this run");
  }
}

}  // namespace

PreparedData prepare_data(const ExperimentConfig& cfg) {
  IngestResult ingested = ingest(cfg.paths.corpus.string(), cfg.paths.corpus_format);
  for (const auto& r : ingested.rejected) {
    std::cerr << "warning: " << cfg.paths.corpus.string() << ":" << r.line
              << ": row rejected (" << r.reason << ")\n";
  }
  PreparedData data;
  data.records = std::move(ingested.records);
  data.queries = split(make_queries(data.records, cfg.query_template), cfg.split);
  return data;
}

// ---------------------------------------------------------------------------

ExtractOutputs cmd_extract_features(const ExperimentConfig& base_cfg,
                                    const ExtractOptions& options) {
  const ExperimentConfig cfg =
      options.max_iterations
          ? base_cfg.with_override(json::json_pointer("/extraction/max_iterations"),
                                   *options.max_iterations)
          : base_cfg;
  const WorkdirLayout layout{cfg.paths.workdir};
  RunManifest manifest = open_manifest(cfg, layout);
  const std::string hash = cfg.hash();

  auto prior = manifest.stages.find(kExtractStage);
  if (!options.force && prior != manifest.stages.end() &&
      prior->second.config_hash == hash && fs::exists(layout.features())) {
    throw UsageError("features for config " + hash + " already exist at " +
                     layout.features().string() + "; pass --force to overwrite");
  }

  const PreparedData data = prepare_data(cfg);
  const BackendContext ctx = cfg.backend_context();
  auto generator = make_generator(cfg.text_generator, ctx);
  auto feature_gen = make_generator(cfg.feature_generator, ctx);
  auto detector = make_detector(cfg.proxy_detector, ctx);
  const PromptLibrary prompts = PromptLibrary::load(cfg.paths.templates_dir.string());

  const ExtractionResult result = run_extraction(
      data.queries.train, *generator, *feature_gen, *detector, prompts, cfg.extraction);

  json echo = cfg.extraction.to_json();
  echo["config_hash"] = hash;
  save_features(layout.features().string(), result.features, echo);
  text::write_file_atomic(layout.trace().string(), trace_to_jsonl(result.trace));
  record_stage(manifest, layout, kExtractStage, hash,
               {{"features", layout.features().string()},
                {"trace", layout.trace().string()}});
  return {layout.features().string(), layout.trace().string(),
          result.trace.terminal_reason, result.features.version};
}

// ---------------------------------------------------------------------------

BuildKbOutputs cmd_build_kb(const ExperimentConfig& cfg,
                            const std::string& features_path) {
  const WorkdirLayout layout{cfg.paths.workdir};
  RunManifest manifest = open_manifest(cfg, layout);
  require_recorded(manifest, features_path, "features file");

  const DisguiseFeatureSet features = load_features(features_path);
  const PreparedData data = prepare_data(cfg);
  const BackendContext ctx = cfg.backend_context();
  auto generator = make_generator(cfg.text_generator, ctx);
  auto detector = make_detector(cfg.proxy_detector, ctx);
  const PromptLibrary prompts = PromptLibrary::load(cfg.paths.templates_dir.string());

  KbBuildConfig kb_cfg;
  kb_cfg.sigma = cfg.extraction.sigma;
  kb_cfg.max_retries_per_query = cfg.max_retries_per_query;
  kb_cfg.parallelism = cfg.parallelism;
  kb_cfg.generation = cfg.generation;

  KbBuildResult built;
  try {
    built = build_kb(data.queries.train, *generator, features, *detector, prompts, kb_cfg);
  } catch (const Error& e) {
    record_stage(manifest, layout, kBuildKbStage, cfg.hash(), {}, false, e.what());
    throw;
  }
  for (const auto& s : built.skipped) {
    std::cerr << "warning: query " << s.query_id << " skipped after " << s.attempts
              << " attempts (last probability " << s.last_probability << ")\n";
  }
  save_kb(layout.kb().string(), built.pairs);
  text::write_file_atomic(layout.kb_skipped().string(), skipped_to_jsonl(built.skipped));
  record_stage(manifest, layout, kBuildKbStage, cfg.hash(),
               {{"kb", layout.kb().string()},
                {"skipped", layout.kb_skipped().string()}});
  return {layout.kb().string(), layout.kb_skipped().string(), built.pairs.size(),
          built.skipped.size()};
}

// ---------------------------------------------------------------------------

SplitName parse_split_name(const std::string& s) {
  if (s == "val") return SplitName::kVal;
  if (s == "test") return SplitName::kTest;
  throw UsageError("split must be 'val' or 'test'");
}

std::string arm_name(bool use_features, bool use_retrieval) {
  if (use_features && use_retrieval) return "sda";
  if (use_features) return "features-only";
  if (use_retrieval) return "retrieval-only";
  return "direct";
}

std::string generated_to_jsonl(const std::vector<GeneratedRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    json j = {{"query_id", r.query_id},
              {"target_id", r.target_id},
              {"arm", r.arm},
              {"text", r.text},
              {"prompt_parts_digest", r.prompt_parts_digest},
              {"n_examples", r.n_examples}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<GeneratedRecord> generated_from_jsonl(const std::string& contents,
                                                  const std::string& path) {
  std::vector<GeneratedRecord> out;
  std::istringstream in(contents);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    try {
      json j = json::parse(line);
      out.push_back({j.at("query_id").get<std::string>(),
                     j.at("target_id").get<std::string>(),
                     j.value("arm", std::string("sda")),
                     j.at("text").get<std::string>(),
                     j.value("prompt_parts_digest", std::string()),
                     j.value("n_examples", size_t{0})});
    } catch (const json::exception& e) {
      throw ParseError(path, line_no, e.what());
    }
  }
  if (out.empty()) throw ParseError(path, 1, "no generated records");
  return out;
}

GenerateOutputs cmd_generate(const ExperimentConfig& cfg,
                             const GenerateOptions& options) {
  const WorkdirLayout layout{cfg.paths.workdir};
  RunManifest manifest = open_manifest(cfg, layout);

  const size_t k = options.k.value_or(cfg.k);
  const bool use_features = cfg.use_features && !options.no_features;
  const bool use_retrieval = cfg.use_retrieval && !options.no_retrieval && k > 0;
  const std::string arm = arm_name(use_features, use_retrieval);
  const std::string split_label = options.split == SplitName::kVal ? "val" : "test";

  DisguiseFeatureSet features;
  if (use_features) {
    if (!options.features_path) throw UsageError("--features is required for arm " + arm);
    require_recorded(manifest, *options.features_path, "features file");
    features = load_features(*options.features_path);
  }

  const BackendContext ctx = cfg.backend_context();
  std::vector<KnowledgePair> pairs;
  std::shared_ptr<const Embedder> embedder;
  std::optional<VectorIndex> index;
  if (use_retrieval) {
    if (!options.kb_path) throw UsageError("--kb is required for arm " + arm);
    require_recorded(manifest, *options.kb_path, "knowledge base");
    pairs = load_kb(*options.kb_path);
    embedder = make_embedder(cfg.embedder, ctx);
    index.emplace(index_kb(pairs, *embedder, cfg.parallelism));
  }

  const PreparedData data = prepare_data(cfg);
  std::vector<Query> queries =
      options.split == SplitName::kVal ? data.queries.val : data.queries.test;
  if (queries.size() > cfg.eval_sample_size) queries.resize(cfg.eval_sample_size);

  const PromptLibrary prompts = PromptLibrary::load(cfg.paths.templates_dir.string());
  const fs::path out_path = layout.generated(arm, split_label);
  const std::string stage = "generate:" + arm + ":" + split_label;

  struct Outcome {
    std::optional<GeneratedRecord> record;
    std::string error;
  };

  std::vector<GeneratedRecord> records;
  std::string first_error;
  for (const auto& target_spec : cfg.target_generators) {
    auto target = make_generator(target_spec, ctx);
    auto outcomes = parallel_map(queries.size(), cfg.parallelism, [&](size_t i) {
      const Query& q = queries[i];
      Outcome o;
      try {
        std::vector<std::string> examples;
        if (use_retrieval) {
          examples = retrieve_examples(*index, pairs, q.text, *embedder, k);
        }
        PromptBundle bundle =
            prompts.render_disguise_prompt(q.text, features, examples, q.query_id);
        GeneratedText g = target->generate(bundle.final_text, cfg.generation, q.query_id);
        o.record = GeneratedRecord{q.query_id, target->id(), arm, std::move(g.text),
                                   bundle.parts.digest(), examples.size()};
      } catch (const Error& e) {
        o.error = "query " + q.query_id + " on " + target->id() + ": " + e.what();
      }
      return o;
    });
    for (auto& o : outcomes) {
      if (o.record) {
        records.push_back(std::move(*o.record));
      } else if (first_error.empty()) {
        first_error = o.error;
      }
    }
  }

  text::write_file_atomic(out_path.string(), generated_to_jsonl(records));
  if (!first_error.empty()) {
    record_stage(manifest, layout, stage, cfg.hash(), {{"generated", out_path.string()}},
                 false, first_error);
    throw BackendError("generation aborted: " + first_error);
  }
  record_stage(manifest, layout, stage, cfg.hash(), {{"generated", out_path.string()}});
  return {out_path.string(), arm, records.size()};
}

// ---------------------------------------------------------------------------

EvaluateOutputs cmd_evaluate(const ExperimentConfig& cfg,
                             const std::string& generated_path) {
  const WorkdirLayout layout{cfg.paths.workdir};
  RunManifest manifest = open_manifest(cfg, layout);
  require_recorded(manifest, generated_path, "generated texts");

  const auto records =
      generated_from_jsonl(text::read_file(generated_path), generated_path);
  const PreparedData data = prepare_data(cfg);
  std::unordered_map<std::string, const CorpusRecord*> by_id;
  for (const auto& r : data.records) by_id[r.record_id] = &r;

  std::vector<std::string> target_order;
  std::map<std::string, std::vector<const GeneratedRecord*>> by_target;
  for (const auto& r : records) {
    auto& bucket = by_target[r.target_id];
    if (bucket.empty()) target_order.push_back(r.target_id);
    bucket.push_back(&r);
  }

  const BackendContext ctx = cfg.backend_context();
  std::vector<std::shared_ptr<const Detector>> detectors;
  for (const auto& spec : cfg.eval_detectors) detectors.push_back(make_detector(spec, ctx));
  auto embedder = make_embedder(cfg.embedder, ctx);
  auto scorer = make_scorer(cfg.scorer, ctx);

  EvaluateOutputs out;
  std::map<std::string, std::string> stage_outputs;
  for (const auto& target : target_order) {
    const auto& recs = by_target[target];
    const std::string arm = recs.front()->arm;
    std::vector<std::string> texts;
    std::vector<std::string> human;
    for (const auto* r : recs) {
      texts.push_back(r->text);
      auto it = by_id.find(r->query_id);
      if (it == by_id.end()) {
        throw UsageError("generated record for unknown query " + r->query_id);
      }
      human.push_back(it->second->human_text);
    }

    MetricsReport report;
    report.arm = arm;
    report.target_id = target;
    report.label = target_order.size() == 1 ? arm : target + "/" + arm;
    report.n_texts = texts.size();
    for (const auto& det : detectors) {
      report.detectors.push_back(det->id());
      try {
        auto results = parallel_map(texts.size(), cfg.parallelism, [&](size_t i) {
          return det->detect(texts[i], cfg.extraction.sigma);
        });
        report.detection_accuracy[det->id()] = detection_accuracy(results);
      } catch (const Error& e) {
        std::cerr << "error: detector " << det->id() << " failed: " << e.what() << "\n";
        report.detection_accuracy[det->id()] = std::nullopt;
        out.detector_failure = true;
      }
    }
    report.average_accuracy = report.compute_average();
    if (texts.size() >= 2) report.self_bleu = self_bleu(texts);
    report.mean_cosine_similarity =
        cosine_report(texts, human, *embedder, cfg.cosine_mode, cfg.parallelism);
    report.mean_perplexity = perplexity_report(texts, *scorer, cfg.parallelism);

    const fs::path metrics_path = layout.metrics(arm, target);
    text::write_file_atomic(metrics_path.string(), report.to_json().dump(2) + "\n");
    stage_outputs["metrics:" + target] = metrics_path.string();

    std::vector<LabeledEmbedding> points;
    const TextSource source = arm == "direct" ? TextSource::kDirect : TextSource::kSda;
    for (size_t i = 0; i < recs.size(); ++i) {
      points.push_back({"human:" + recs[i]->query_id, TextSource::kHuman,
                        embedder->embed(human[i])});
    }
    for (size_t i = 0; i < recs.size(); ++i) {
      points.push_back({target + ":" + recs[i]->query_id, source, embedder->embed(texts[i])});
    }
    try {
      const fs::path proj = layout.projection(arm, target);
      text::write_file_atomic(proj.string(), projection_to_csv(pca_project(points)));
      stage_outputs["projection:" + target] = proj.string();
    } catch (const Error& e) {
      std::cerr << "warning: no projection for " << target << ": " << e.what() << "\n";
    }

    out.metrics_paths.push_back(metrics_path.string());
    out.reports.push_back(std::move(report));
  }
  record_stage(manifest, layout, "evaluate:" + fs::path(generated_path).stem().string(),
               cfg.hash(), stage_outputs,
               !out.detector_failure,
               out.detector_failure ? "one or more detectors failed" : "");
  return out;
}

}  // namespace sda
