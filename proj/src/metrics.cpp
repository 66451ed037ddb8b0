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

#include "sda/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "sda/error.hpp"
#include "sda/hashing.hpp"
#include "sda/parallel.hpp"
#include "sda/text_util.hpp"

namespace sda {

using nlohmann::json;

double detection_accuracy(std::span<const DetectionResult> results) {
  if (results.empty()) throw UsageError("detection_accuracy of no results");
  size_t hits = 0;
  for (const auto& r : results) hits += r.is_ai;
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

double evasion_rate(std::span<const DetectionResult> results) {
  if (results.empty()) throw UsageError("evasion_rate of no results");
  size_t misses = 0;
  for (const auto& r : results) misses += !r.is_ai;
  return static_cast<double>(misses) / static_cast<double>(results.size());
}

// ---------------------------------------------------------------------------
// BLEU

namespace {

bool is_ascii_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u);
}

using NgramCounts = std::map<std::vector<std::string>, int>;

NgramCounts count_ngrams(const std::vector<std::string>& tokens, int n) {
  NgramCounts counts;
  const size_t len = static_cast<size_t>(n);
  for (size_t i = 0; i + len <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + len))];
  }
  return counts;
}

}  // namespace

std::vector<std::string> bleu_tokenize(std::string_view s) {
  std::vector<std::string> out;
  for (auto tok : text::split_whitespace(s)) {
    size_t b = 0;
    size_t e = tok.size();
    while (b < e && is_ascii_punct(tok[b])) ++b;
    while (e > b && is_ascii_punct(tok[e - 1])) --e;
    if (e > b) out.push_back(text::to_lower_ascii(tok.substr(b, e - b)));
  }
  return out;
}

double sentence_bleu(const std::vector<std::string>& candidate,
                     const std::vector<std::vector<std::string>>& references,
                     int max_n) {
  if (max_n < 1) throw UsageError("BLEU max_n must be >= 1");
  if (references.empty()) throw UsageError("BLEU needs at least one reference");
  if (candidate.empty()) return 0.0;

  double log_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    const NgramCounts cand = count_ngrams(candidate, n);
    NgramCounts max_ref;
    for (const auto& ref : references) {
      for (const auto& [gram, c] : count_ngrams(ref, n)) {
        int& m = max_ref[gram];
        m = std::max(m, c);
      }
    }
    long clipped = 0;
    long total = 0;
    for (const auto& [gram, c] : cand) {
      total += c;
      auto it = max_ref.find(gram);
      if (it != max_ref.end()) clipped += std::min(c, it->second);
    }
    double p = total > 0 ? static_cast<double>(clipped) / static_cast<double>(total)
                         : 0.0;
    if (p == 0.0) p = kBleuEpsilon;
    log_sum += std::log(p) / static_cast<double>(max_n);
  }

  const size_t c = candidate.size();
  size_t r = references.front().size();
  for (const auto& ref : references) {
    const auto d_new = std::llabs(static_cast<long long>(ref.size()) - static_cast<long long>(c));
    const auto d_old = std::llabs(static_cast<long long>(r) - static_cast<long long>(c));
    if (d_new < d_old || (d_new == d_old && ref.size() < r)) r = ref.size();
  }
  const double bp = c > r ? 1.0
                          : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
  return bp * std::exp(log_sum);
}

double self_bleu(const std::vector<std::string>& corpus, int max_n) {
  if (corpus.size() < 2) throw UsageError("self-BLEU needs at least two texts");
  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(corpus.size());
  for (const auto& t : corpus) tokens.push_back(bleu_tokenize(t));

  double sum = 0.0;
  for (size_t i = 0; i < tokens.size(); ++i) {
    std::vector<std::vector<std::string>> refs;
    refs.reserve(tokens.size() - 1);
    for (size_t j = 0; j < tokens.size(); ++j) {
      if (j != i) refs.push_back(tokens[j]);
    }
    sum += sentence_bleu(tokens[i], refs, max_n);
  }
  return sum / static_cast<double>(tokens.size());
}

// ---------------------------------------------------------------------------
// Cosine, perplexity

CosineMode parse_cosine_mode(const std::string& name) {
  if (name == "paired") return CosineMode::kPaired;
  if (name == "centroid") return CosineMode::kCentroid;
  throw UsageError("cosine mode must be 'paired' or 'centroid'");
}

double cosine_report(const std::vector<std::string>& generated,
                     const std::vector<std::string>& human, const Embedder& embedder,
                     CosineMode mode, size_t parallelism) {
  if (generated.size() != human.size()) {
    throw UsageError("cosine_report: " + std::to_string(generated.size()) +
                     " generated texts vs " + std::to_string(human.size()) +
                     " human texts");
  }
  if (generated.empty()) throw UsageError("cosine_report of no texts");
  const size_t n = generated.size();
  auto g = parallel_map(n, parallelism, [&](size_t i) { return embedder.embed(generated[i]); });
  auto h = parallel_map(n, parallelism, [&](size_t i) { return embedder.embed(human[i]); });

  if (mode == CosineMode::kPaired) {
    double sum = 0.0;
    for (size_t i = 0; i < n; ++i) sum += g[i].dot(h[i]);
    return sum / static_cast<double>(n);
  }
  const size_t dim = g.front().dimension();
  std::vector<double> cg(dim, 0.0);
  std::vector<double> ch(dim, 0.0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t d = 0; d < dim; ++d) {
      cg[d] += g[i].values()[d];
      ch[d] += h[i].values()[d];
    }
  }
  return EmbeddingVector::normalize(std::move(cg))
      .dot(EmbeddingVector::normalize(std::move(ch)));
}

double perplexity_report(const std::vector<std::string>& corpus,
                         const PerplexityScorer& scorer, size_t parallelism) {
  if (corpus.empty()) throw UsageError("perplexity_report of no texts");
  auto ppl = parallel_map(corpus.size(), parallelism,
                          [&](size_t i) { return scorer.score_perplexity(corpus[i]); });
  double sum = 0.0;
  for (double p : ppl) sum += p;
  return sum / static_cast<double>(corpus.size());
}

// ---------------------------------------------------------------------------
// PCA

namespace {

using Matrix = std::vector<std::vector<double>>;

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

std::vector<double> multiply(const Matrix& m, const std::vector<double>& v) {
  std::vector<double> out(m.size(), 0.0);
  for (size_t i = 0; i < m.size(); ++i) out[i] = dot(m[i], v);
  return out;
}

void orthogonalize(std::vector<double>& v, const Matrix& basis) {
  for (const auto& b : basis) {
    const double p = dot(v, b);
    for (size_t i = 0; i < v.size(); ++i) v[i] -= p * b[i];
  }
}

void fix_sign(std::vector<double>& v) {
  size_t arg = 0;
  for (size_t i = 1; i < v.size(); ++i) {
    if (std::fabs(v[i]) > std::fabs(v[arg])) arg = i;
  }
  if (v[arg] < 0.0) {
    for (double& x : v) x = -x;
  }
}

}  // namespace

PcaResult pca(const Matrix& points, size_t out_dims, const PcaOptions& options) {
  if (out_dims < 1) throw UsageError("PCA needs out_dims >= 1");
  if (points.size() < out_dims + 1) {
    throw UsageError("PCA needs at least " + std::to_string(out_dims + 1) + " points");
  }
  const size_t dim = points.front().size();
  if (dim < out_dims) throw UsageError("PCA out_dims exceeds the data dimension");
  for (const auto& p : points) {
    if (p.size() != dim) throw InvariantError("PCA points differ in dimension");
  }
  const double n = static_cast<double>(points.size());

  PcaResult r;
  r.mean.assign(dim, 0.0);
  for (const auto& p : points) {
    for (size_t d = 0; d < dim; ++d) r.mean[d] += p[d];
  }
  for (double& m : r.mean) m /= n;

  Matrix centered = points;
  for (auto& p : centered) {
    for (size_t d = 0; d < dim; ++d) p[d] -= r.mean[d];
  }

  Matrix cov(dim, std::vector<double>(dim, 0.0));
  for (const auto& p : centered) {
    for (size_t a = 0; a < dim; ++a) {
      if (p[a] == 0.0) continue;
      for (size_t b = a; b < dim; ++b) cov[a][b] += p[a] * p[b];
    }
  }
  for (size_t a = 0; a < dim; ++a) {
    for (size_t b = a; b < dim; ++b) {
      cov[a][b] /= n;
      cov[b][a] = cov[a][b];
    }
    r.total_variance += cov[a][a];
  }
  if (!(r.total_variance > 0.0)) {
    throw InvariantError("PCA input is degenerate: all points are identical");
  }

  Lcg64 rng(options.seed);
  Matrix deflated = cov;
  for (size_t c = 0; c < out_dims; ++c) {
    std::vector<double> v(dim);
    for (double& x : v) x = rng.next_unit() - 0.5;
    orthogonalize(v, r.components);
    double vn = norm(v);
    for (double& x : v) x /= vn;

    for (int it = 0; it < options.max_iterations; ++it) {
      std::vector<double> w = multiply(deflated, v);
      orthogonalize(w, r.components);
      const double wn = norm(w);
      // Remaining variance is numerically zero: any orthogonal unit vector is
      // an eigenvector.
      if (wn <= 1e-15 * r.total_variance) break;
      for (double& x : w) x /= wn;
      std::vector<double> diff(dim);
      for (size_t d = 0; d < dim; ++d) diff[d] = w[d] - v[d];
      v = std::move(w);
      if (norm(diff) < options.tolerance) break;
    }

    fix_sign(v);
    const double lambda = std::max(0.0, dot(v, multiply(cov, v)));
    for (size_t a = 0; a < dim; ++a) {
      for (size_t b = 0; b < dim; ++b) deflated[a][b] -= lambda * v[a] * v[b];
    }
    r.components.push_back(std::move(v));
    r.variances.push_back(lambda);
  }

  r.coordinates.reserve(centered.size());
  for (const auto& p : centered) {
    std::vector<double> row(out_dims);
    for (size_t c = 0; c < out_dims; ++c) row[c] = dot(p, r.components[c]);
    r.coordinates.push_back(std::move(row));
  }
  return r;
}

std::string_view to_string(TextSource s) {
  switch (s) {
    case TextSource::kHuman:
      return "human";
    case TextSource::kDirect:
      return "direct";
    case TextSource::kSda:
      return "sda";
  }
  return "unknown";
}

TextSource parse_text_source(std::string_view s) {
  if (s == "human") return TextSource::kHuman;
  if (s == "direct") return TextSource::kDirect;
  if (s == "sda") return TextSource::kSda;
  throw UsageError("unknown text source '" + std::string(s) + "'");
}

std::vector<ProjectedPoint> pca_project(const std::vector<LabeledEmbedding>& items,
                                        const PcaOptions& options) {
  Matrix points;
  points.reserve(items.size());
  for (const auto& it : items) points.push_back(it.vector.values());
  const PcaResult r = pca(points, 2, options);
  std::vector<ProjectedPoint> out;
  out.reserve(items.size());
  for (size_t i = 0; i < items.size(); ++i) {
    out.push_back({items[i].text_id, items[i].source, r.coordinates[i][0],
                   r.coordinates[i][1]});
  }
  return out;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string projection_to_csv(const std::vector<ProjectedPoint>& points) {
  std::string out = "text_id,source,x,y\n";
  for (const auto& p : points) {
    out += csv_field(p.text_id) + "," + std::string(to_string(p.source)) + "," +
           format_g17(p.x) + "," + format_g17(p.y) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report

std::optional<double> MetricsReport::compute_average() const {
  if (detectors.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& d : detectors) {
    auto it = detection_accuracy.find(d);
    if (it == detection_accuracy.end() || !it->second) return std::nullopt;
    sum += *it->second;
  }
  return sum / static_cast<double>(detectors.size());
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_opt(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

}  // namespace

json MetricsReport::to_json() const {
  json acc = json::object();
  for (const auto& d : detectors) {
    auto it = detection_accuracy.find(d);
    acc[d] = it == detection_accuracy.end() ? json(nullptr) : opt(it->second);
  }
  return {{"label", label},
          {"arm", arm},
          {"target_id", target_id},
          {"detectors", detectors},
          {"detection_accuracy", acc},
          {"average_accuracy", opt(average_accuracy)},
          {"self_bleu", opt(self_bleu)},
          {"mean_cosine_similarity", opt(mean_cosine_similarity)},
          {"mean_perplexity", opt(mean_perplexity)},
          {"n_texts", n_texts}};
}

MetricsReport MetricsReport::from_json(const json& j) {
  MetricsReport r;
  try {
    r.label = j.value("label", std::string());
    r.arm = j.value("arm", std::string());
    r.target_id = j.value("target_id", std::string());
    const json& acc = j.at("detection_accuracy");
    if (j.contains("detectors")) {
      r.detectors = j["detectors"].get<std::vector<std::string>>();
    } else {
      for (const auto& [k, v] : acc.items()) r.detectors.push_back(k);
    }
    for (const auto& d : r.detectors) r.detection_accuracy[d] = read_opt(acc, d.c_str());
    r.average_accuracy = read_opt(j, "average_accuracy");
    r.self_bleu = read_opt(j, "self_bleu");
    r.mean_cosine_similarity = read_opt(j, "mean_cosine_similarity");
    r.mean_perplexity = read_opt(j, "mean_perplexity");
    r.n_texts = j.value("n_texts", size_t{0});
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed metrics report: ") + e.what());
  }
  for (const auto& [d, v] : r.detection_accuracy) {
    if (v && !(*v >= 0.0 && *v <= 1.0)) {
      throw InvariantError("accuracy for " + d + " outside [0, 1]");
    }
  }
  return r;
}

double round_half_up(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const double scaled = value * scale;
  const double guard = 1e-9 * std::max(1.0, std::fabs(scaled));
  return std::floor(scaled + 0.5 + guard) / scale;
}

}  // namespace sda
