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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sda/error.hpp"
#include "sda/extractor.hpp"
#include "sda/features.hpp"
#include "sda/knowledge_base.hpp"
#include "sda/manifest.hpp"
#include "sda/metrics.hpp"
#include "sda/runner.hpp"
#include "sda/text_util.hpp"
#include "test_support.hpp"

namespace {

using namespace sda;
using nlohmann::json;
using testing::fixture;
using Clock = std::chrono::steady_clock;

// Collects failed checks for one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++count_;
  }
  bool ok() const { return count_ == 0; }
  std::string summary() const {
    std::string s;
    for (const auto& f : failures_) s += (s.empty() ? "" : "; ") + f;
    if (count_ > failures_.size()) s += "; +" + std::to_string(count_ - failures_.size());
    return s;
  }

 private:
  std::vector<std::string> failures_;
  size_t count_ = 0;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------

void knn_exactness(Check& c, std::string& detail) {
  std::mt19937_64 rng(1);
  const size_t sizes[] = {10, 100, 1000};
  const size_t dims[] = {8, 256};
  size_t probes = 0;
  for (int inst = 0; inst < 50; ++inst) {
    const size_t n = sizes[inst % 3];
    const size_t d = dims[(inst / 3) % 2];
    std::vector<VectorIndex::Entry> entries;
    std::vector<EmbeddingVector> pool;
    for (size_t i = 0; i < n; ++i) {
      entries.push_back({static_cast<int64_t>(i + 1), testing::random_unit(rng, d, &pool)});
    }
    std::shuffle(entries.begin(), entries.end(), rng);
    const VectorIndex index(d, "e", entries);
    for (size_t k : {size_t{0}, size_t{1}, size_t{5}, n}) {
      const auto probe = testing::random_unit(rng, d, &pool);
      ++probes;
      c.expect(knn(index, probe, k) == testing::knn_oracle(entries, probe, k),
               "instance " + std::to_string(inst) + " k=" + std::to_string(k));
    }
  }
  detail = "50 instances, " + std::to_string(probes) + " probes";
}

void termination_rule(Check& c, std::string& detail) {
  c.expect(should_terminate(std::vector<int>{7, 1, 2}, 2), "[7,1,2],2");
  c.expect(!should_terminate(std::vector<int>{2}, 2), "[2],2");
  c.expect(!should_terminate(std::vector<int>{3, 2}, 2), "[3,2],2");
  c.expect(should_terminate(std::vector<int>{0, 0}, 0), "[0,0],0");
  std::mt19937 rng(99);
  for (int i = 0; i < 200; ++i) {
    std::vector<int> h(rng() % 6);
    for (int& x : h) x = static_cast<int>(rng() % 8);
    const int delta = static_cast<int>(rng() % 4);
    const bool oracle = h.size() >= 2 && h[h.size() - 1] <= delta && h[h.size() - 2] <= delta;
    c.expect(should_terminate(h, delta) == oracle, "random case " + std::to_string(i));
  }
  detail = "truth table + 200 random cases";
}

void extraction_convergence(Check& c, std::string& detail) {
  const auto records = ingest(fixture("corpus_100.csv"), CorpusFormat::kCsv).records;
  SplitSpec spec;
  spec.seed = 42;
  auto queries = split(make_queries(records), spec).train;
  queries.resize(30);
  const auto gen = testing::pooled_mock();
  const auto fgen = testing::feature_mock();
  const BuiltinDetector det("builtin");
  ExtractionConfig cfg;
  cfg.generation.seed = 23;
  cfg.parallelism = 4;
  const auto r = run_extraction(queries, gen, *fgen, det, testing::prompts(), cfg);
  c.expect(r.trace.terminal_reason == TerminalReason::kConverged,
           std::string("terminal_reason ") + std::string(to_string(r.trace.terminal_reason)));
  c.expect(r.features.version >= 1, "feature version " + std::to_string(r.features.version));
  const auto& its = r.trace.iterations;
  std::string counts;
  for (size_t i = 0; i < its.size(); ++i) {
    counts += (i ? "," : "") + std::to_string(its[i].detected_count);
    if (i > 0 && its[i - 1].feature_version_after >= 1) {
      c.expect(its[i].detected_count <= cfg.delta,
               "iteration " + std::to_string(i + 1) + " detected " +
                   std::to_string(its[i].detected_count));
    }
  }
  detail = "detected per iteration [" + counts + "], version " +
           std::to_string(r.features.version);
}

void evasion_delta(Check& c, std::string& detail) {
  testing::MockRun run("acceptance-e2e");
  const auto cfg = run.config();
  const auto ex = cmd_extract_features(cfg);
  const auto kb = cmd_build_kb(cfg, ex.features_path);
  GenerateOptions full;
  full.features_path = ex.features_path;
  full.kb_path = kb.kb_path;
  const auto sda_gen = cmd_generate(cfg, full);
  GenerateOptions direct;
  direct.no_features = true;
  direct.no_retrieval = true;
  const auto direct_gen = cmd_generate(cfg, direct);
  const auto sda_eval = cmd_evaluate(cfg, sda_gen.generated_path);
  const auto direct_eval = cmd_evaluate(cfg, direct_gen.generated_path);
  const double sda_acc = sda_eval.reports.at(0).detection_accuracy.at("builtin").value();
  const double direct_acc = direct_eval.reports.at(0).detection_accuracy.at("builtin").value();
  c.expect(sda_gen.n_records == 20 && direct_gen.n_records == 20, "expected 20 records per arm");
  c.expect(direct_acc >= 0.9, "direct accuracy " + fmt(direct_acc));
  c.expect(sda_acc <= 0.1, "sda accuracy " + fmt(sda_acc));
  char buf[128];
  std::snprintf(buf, sizeof(buf), "direct %.2f, sda %.2f over 20 queries", direct_acc, sda_acc);
  detail = buf;
}

void self_bleu_oracle(Check& c, std::string& detail) {
  const std::vector<std::string> corpus = {
      "The cat sat on the mat and the dog slept by the door.",
      "The cat sat on the mat, while the dog slept by the fire.",
      "Stock prices rose sharply after the announcement.",
      "A dog slept by the door; the cat sat on the rug.",
  };
  const double expected = 0.5037134504810762;  // tests/oracles/bleu_oracle.py
  const double got = self_bleu(corpus);
  c.expect(std::abs(got - expected) <= 1e-9, "self_bleu " + fmt(got));
  const double same = self_bleu({"one two three four five", "one two three four five"});
  c.expect(same == 1.0, "identical pair " + fmt(same));
  detail = "self_bleu " + fmt(got) + " vs oracle " + fmt(expected);
}

void metrics_trivia(Check& c, std::string& detail) {
  const BuiltinEmbedder emb("trigram", 256);
  const auto texts = text::read_lines(fixture("human_pool.txt"));
  const double cos = cosine_report(texts, texts, emb);
  c.expect(std::abs(cos - 1.0) <= 1e-9, "cosine " + fmt(cos));
  std::mt19937 rng(5);
  for (int i = 0; i < 1000; ++i) {
    std::vector<DetectionResult> r(1 + rng() % 250);
    size_t hits = 0;
    for (auto& x : r) {
      x.is_ai = rng() % 2 == 0;
      x.probability = x.is_ai ? 0.8 : 0.2;
      hits += x.is_ai;
    }
    c.expect(detection_accuracy(r) == static_cast<double>(hits) / static_cast<double>(r.size()),
             "accuracy list " + std::to_string(i));
  }
  const UnigramScorer scorer("unigram", "a a a a");
  const double ppl = scorer.score_perplexity("a a");
  c.expect(ppl == 1.2, "unigram ppl " + fmt(ppl));
  detail = "cosine " + fmt(cos) + ", 1000 accuracy lists, ppl " + fmt(ppl);
}

void pca_correctness(Check& c, std::string& detail) {
  const auto pts = testing::gaussian_cloud_3d(200, 2026);
  const auto r = pca(pts, 2);
  Eigen::MatrixXd x(200, 3);
  for (int i = 0; i < 200; ++i) {
    for (int j = 0; j < 3; ++j) x(i, j) = pts[i][j];
  }
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / 200.0;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  double worst = 0.0;
  for (int comp = 0; comp < 2; ++comp) {
    const Eigen::VectorXd e = eig.eigenvectors().col(2 - comp);
    double d = 0.0;
    for (int k = 0; k < 3; ++k) d += e(k) * r.components[comp][k];
    const double sign = d < 0 ? -1.0 : 1.0;
    for (int k = 0; k < 3; ++k) {
      worst = std::max(worst, std::abs(r.components[comp][k] - sign * e(k)));
    }
  }
  c.expect(worst <= 1e-6, "component deviation " + fmt(worst));
  double ortho = 0.0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      double d = 0.0;
      for (int k = 0; k < 3; ++k) d += r.components[a][k] * r.components[b][k];
      ortho = std::max(ortho, std::abs(d - (a == b ? 1.0 : 0.0)));
    }
  }
  c.expect(ortho <= 1e-6, "orthonormality " + fmt(ortho));

  std::vector<std::vector<double>> line;
  for (int i = 0; i < 50; ++i) {
    const double t = 0.1 * i;
    line.push_back({1.0 + 2.0 * t, -t, 0.5 * t, 3.0});
  }
  const auto rank1 = pca(line, 2);
  c.expect(rank1.explained_ratio(0) >= 1.0 - 1e-9, "rank-1 ratio " + fmt(rank1.explained_ratio(0)));
  detail = "max component deviation " + fmt(worst) + ", rank-1 captured " +
           fmt(rank1.explained_ratio(0));
}

void report_arithmetic(Check& c, std::string& detail) {
  MetricsReport r;
  r.label = "SDA";
  r.arm = "sda";
  r.target_id = "qwen-max";
  r.detectors = {"RADAR", "DeTeCtive", "MPU", "ChatGPT-D"};
  r.detection_accuracy = {{"RADAR", 0.34}, {"DeTeCtive", 0.81}, {"MPU", 0.33},
                          {"ChatGPT-D", 0.215}};
  r.average_accuracy = r.compute_average();
  r.n_texts = 200;
  const auto dir = testing::temp_dir("acceptance-report");
  const std::string path = (dir / "metrics.json").string();
  text::write_file_atomic(path, r.to_json().dump(2) + "\n");
  const auto out = cmd_report({path});
  std::filesystem::remove_all(dir);

  const double mean = *r.average_accuracy * 100.0;
  c.expect(std::abs(mean - 42.375) <= 1e-9, "full-precision mean " + fmt(mean));
  const std::string row = out.table.substr(out.table.find("SDA"));
  const std::string row_line = row.substr(0, row.find('\n'));
  c.expect(row_line.size() >= 5 && row_line.substr(row_line.size() - 5) == "42.38",
           "row '" + row_line + "'");
  c.expect(out.table.find("42.375") != std::string::npos &&
               out.table.find("42.39") != std::string::npos,
           "footnote lacks 42.375 / 42.39");
  detail = "Average 42.38 from mean " + fmt(mean);
}

void split_determinism(Check& c, std::string& detail) {
  std::vector<CorpusRecord> records;
  for (int i = 0; i < 1000; ++i) {
    records.push_back({"r" + std::to_string(i), "T" + std::to_string(i), "x", std::nullopt});
  }
  SplitSpec spec;
  spec.seed = 42;
  const auto a = split(records, spec);
  const auto b = split(records, spec);
  c.expect(a.train.size() == 600 && a.val.size() == 200 && a.test.size() == 200,
           "sizes " + std::to_string(a.train.size()) + "/" + std::to_string(a.val.size()) +
               "/" + std::to_string(a.test.size()));
  c.expect(a.train == b.train && a.val == b.val && a.test == b.test, "runs differ");
  std::mt19937_64 rng(8);
  for (int i = 0; i < 100; ++i) {
    const size_t n = 10 + rng() % 400;
    SplitSpec s;
    s.seed = rng();
    std::vector<CorpusRecord> items(records.begin(), records.begin() + static_cast<long>(n));
    const auto p = split(items, s);
    std::vector<std::string> ids;
    for (const auto* part : {&p.train, &p.val, &p.test}) {
      for (const auto& r : *part) ids.push_back(r.record_id);
    }
    std::vector<std::string> expected;
    for (const auto& r : items) expected.push_back(r.record_id);
    std::sort(ids.begin(), ids.end());
    std::sort(expected.begin(), expected.end());
    c.expect(ids == expected, "partition case " + std::to_string(i));
  }
  detail = "600/200/200, 100 partition cases";
}

void persistence(Check& c, std::string& detail) {
  const auto dir = testing::temp_dir("acceptance-persist");
  auto round_trip = [&](const std::string& name, const std::function<void()>& save,
                        const std::function<void()>& reload_and_save,
                        const std::function<std::string(const std::string&)>& normalize) {
    const std::string path = (dir / name).string();
    save();
    const std::string first = normalize(text::read_file(path));
    reload_and_save();
    c.expect(normalize(text::read_file(path)) == first, name + " changed on round trip");
  };

  std::vector<KnowledgePair> pairs;
  for (int i = 1; i <= 100; ++i) {
    pairs.push_back({i, "query " + std::to_string(i), "response, \"" + std::to_string(i) + "\"",
                     1.0 / (i + 2.0), 1});
  }
  const std::string kb_path = (dir / "kb.jsonl").string();
  round_trip("kb.jsonl", [&] { save_kb(kb_path, pairs); },
             [&] {
               auto loaded = load_kb(kb_path);
               c.expect(loaded == pairs, "kb pairs differ after load");
               save_kb(kb_path, loaded);
             },
             [](const std::string& s) { return s; });

  DisguiseFeatureSet f;
  f.version = 3;
  f.text = std::string(text::trim(text::read_file(fixture("feature_text.txt"))));
  f.produced_by = "mock-features";
  f.parent_version = 2;
  const std::string features_path = (dir / "features.json").string();
  round_trip("features.json", [&] { save_features(features_path, f, json{{"eta", 5}}); },
             [&] {
               json echo;
               auto loaded = load_features(features_path, &echo);
               save_features(features_path, loaded, echo);
             },
             [](const std::string& s) { return s; });

  RunManifest m = RunManifest::load_or_create((dir / "manifest.json").string(), "00ff00ff00ff00ff");
  m.stages["extract-features"] = {"00ff00ff00ff00ff", {{"features", features_path}},
                                  utc_timestamp(), true, ""};
  m.stages["build-kb"] = {"00ff00ff00ff00ff", {{"kb", kb_path}}, utc_timestamp(), true, ""};
  const std::string manifest_path = (dir / "manifest.json").string();
  auto strip_timestamps = [](const std::string& s) {
    json j = json::parse(s);
    j.erase("created_at");
    j.erase("updated_at");
    for (auto& [name, stage] : j["stages"].items()) stage.erase("completed_at");
    return j.dump();
  };
  round_trip("manifest.json", [&] { m.save(manifest_path); },
             [&] { RunManifest::load(manifest_path).save(manifest_path); }, strip_timestamps);
  std::filesystem::remove_all(dir);
  detail = "kb (100 pairs), features, manifest";
}

void prompt_goldens(Check& c, std::string& detail) {
  const auto lib = testing::prompts();
  const std::vector<std::string> examples = {
      "We measured the drift twice, once at dawn and once at noon.",
      "My notes, sadly, were incomplete; our second pass fixed that.",
      "I doubt the {features} placeholder survives here, and that's fine.",
      "Results held across seeds, though the variance was \"large\".",
      "Our group, small as it is, ran every ablation by hand.",
  };
  const std::vector<std::string> characteristics = ExtractionConfig{}.characteristics;
  const std::string query =
      "Write the abstract for the academic paper titled 'Sparse Attention at Scale'.";
  DisguiseFeatureSet f;
  f.version = 1;
  f.text = "FEATURES-ACTIVE Mix short and long sentences, use commas freely";
  f.produced_by = "features";
  f.parent_version = 0;

  const std::vector<std::pair<std::string, PromptBundle>> rendered = {
      {"generation_v0.txt", lib.render_generation_prompt(query, DisguiseFeatureSet{})},
      {"generation_v1.txt", lib.render_generation_prompt(query, f)},
      {"feature_construction.txt", lib.render_feature_prompt(examples, characteristics)},
      {"disguise_full.txt", lib.render_disguise_prompt(query, f, examples)},
      {"disguise_no_examples.txt", lib.render_disguise_prompt(query, f, {})},
  };
  size_t worst = 0;
  for (const auto& [name, b] : rendered) {
    c.expect(b.final_text == text::read_file(fixture("golden/" + name)), name + " differs");
    size_t parts = b.parts.instruction.size() + (b.parts.features ? b.parts.features->size() : 0);
    for (const auto& e : b.parts.examples) parts += e.size();
    const size_t overhead = b.final_text.size() - parts;
    worst = std::max(worst, overhead);
    c.expect(overhead <= 500, name + " overhead " + std::to_string(overhead));
  }
  detail = "5 goldens, max scaffolding " + std::to_string(worst) + " chars";
}

struct Criterion {
  int number;
  const char* name;
  double time_limit_s;  // 0 = instant
  std::function<void(Check&, std::string&)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "kNN exactness", 10.0, knn_exactness},
      {2, "termination rule", 1.0, termination_rule},
      {3, "extraction convergence (mock)", 5.0, extraction_convergence},
      {4, "end-to-end evasion delta (mock)", 60.0, evasion_delta},
      {5, "self-BLEU oracle", 1.0, self_bleu_oracle},
      {6, "metrics trivia", 1.0, metrics_trivia},
      {7, "PCA correctness", 2.0, pca_correctness},
      {8, "report arithmetic", 1.0, report_arithmetic},
      {9, "split determinism", 1.0, split_determinism},
      {10, "persistence round trips", 1.0, persistence},
      {11, "prompt goldens", 1.0, prompt_goldens},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    Check check;
    std::string detail;
    const auto start = Clock::now();
    try {
      cr.run(check, detail);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    check.expect(secs < cr.time_limit_s, "took " + fmt(secs) + " s, limit " +
                                             fmt(cr.time_limit_s) + " s");
    const bool ok = check.ok();
    failed += !ok;
    std::printf("%s criterion %2d: %s (%.3f s) %s\n", ok ? "PASS" : "FAIL", cr.number, cr.name,
                secs, ok ? detail.c_str() : check.summary().c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
