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

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sda/backends.hpp"

namespace sda {

// Fraction of attacked texts the detector flagged (every input is
// AI-generated, so a flag is a correct detection).
double detection_accuracy(std::span<const DetectionResult> results);
double evasion_rate(std::span<const DetectionResult> results);

// ---------------------------------------------------------------------------
// BLEU

inline constexpr double kBleuEpsilon = 1e-9;

// Lowercase, split on whitespace, strip leading and trailing ASCII
// punctuation, drop tokens that become empty.
std::vector<std::string> bleu_tokenize(std::string_view text);

// BLEU of one tokenized candidate against a reference set. Uniform weights
// over 1..max_n, counts clipped by the maximum count in any single reference,
// zero precisions replaced by kBleuEpsilon, brevity penalty against the
// closest reference length (shorter wins ties). An empty candidate scores 0.
double sentence_bleu(const std::vector<std::string>& candidate,
                     const std::vector<std::vector<std::string>>& references,
                     int max_n = 4);

// Mean over texts of BLEU(text; every other text). Needs >= 2 texts.
double self_bleu(const std::vector<std::string>& corpus, int max_n = 4);

// ---------------------------------------------------------------------------
// Similarity and fluency

enum class CosineMode {
  kPaired,    // mean of cos(embed(g_i), embed(h_i))
  kCentroid,  // cos(mean generated embedding, mean human embedding)
};

CosineMode parse_cosine_mode(const std::string& name);

double cosine_report(const std::vector<std::string>& generated,
                     const std::vector<std::string>& human,
                     const Embedder& embedder,
                     CosineMode mode = CosineMode::kPaired,
                     size_t parallelism = 8);

double perplexity_report(const std::vector<std::string>& corpus,
                         const PerplexityScorer& scorer, size_t parallelism = 8);

// ---------------------------------------------------------------------------
// PCA

struct PcaResult {
  std::vector<double> mean;
  // Unit-norm, mutually orthogonal principal directions, largest variance
  // first. Each is signed so its largest-magnitude coordinate is positive.
  std::vector<std::vector<double>> components;
  std::vector<double> variances;        // eigenvalues of the covariance
  double total_variance = 0.0;          // trace of the covariance
  std::vector<std::vector<double>> coordinates;  // one row per input point

  double explained_ratio(size_t c) const { return variances[c] / total_variance; }
};

struct PcaOptions {
  int max_iterations = 1000;
  double tolerance = 1e-10;  // stop when the direction moves less than this
  uint64_t seed = 0x5eed;
};

// Power iteration with deflation on the population covariance. Needs at
// least out_dims + 1 points of equal dimension; throws when every point is
// identical.
PcaResult pca(const std::vector<std::vector<double>>& points, size_t out_dims = 2,
              const PcaOptions& options = {});

enum class TextSource { kHuman, kDirect, kSda };
std::string_view to_string(TextSource s);
TextSource parse_text_source(std::string_view s);

struct ProjectedPoint {
  std::string text_id;
  TextSource source = TextSource::kHuman;
  double x = 0.0;
  double y = 0.0;
};

struct LabeledEmbedding {
  std::string text_id;
  TextSource source;
  EmbeddingVector vector;
};

std::vector<ProjectedPoint> pca_project(const std::vector<LabeledEmbedding>& items,
                                        const PcaOptions& options = {});

// Header text_id,source,x,y; coordinates printed with 17 significant digits.
std::string projection_to_csv(const std::vector<ProjectedPoint>& points);

// ---------------------------------------------------------------------------
// Report

struct MetricsReport {
  std::string label;       // row name in rendered tables
  std::string arm;         // sda, direct, features-only, retrieval-only
  std::string target_id;
  std::vector<std::string> detectors;  // column order
  // Null when the detector failed.
  std::map<std::string, std::optional<double>> detection_accuracy;
  std::optional<double> average_accuracy;
  std::optional<double> self_bleu;
  std::optional<double> mean_cosine_similarity;
  std::optional<double> mean_perplexity;
  size_t n_texts = 0;

  // Mean of the per-detector accuracies, or nullopt if any is missing.
  std::optional<double> compute_average() const;

  nlohmann::json to_json() const;
  static MetricsReport from_json(const nlohmann::json& j);
};

// Half-up rounding of value * 10^decimals with a 1e-9 guard against binary
// representation error (0.42375 * 100 rounds to 42.38).
double round_half_up(double value, int decimals);

}  // namespace sda
