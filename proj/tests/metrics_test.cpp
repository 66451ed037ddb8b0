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
#include <random>

#include <gtest/gtest.h>

#include "sda/error.hpp"
#include "sda/text_util.hpp"
#include "test_support.hpp"

namespace sda {
namespace {

using testing::fixture;

const std::vector<std::string> kBleuCorpus = {
    "The cat sat on the mat and the dog slept by the door.",
    "The cat sat on the mat, while the dog slept by the fire.",
    "Stock prices rose sharply after the announcement.",
    "A dog slept by the door; the cat sat on the rug.",
};

std::vector<DetectionResult> results_from(const std::vector<bool>& flags) {
  std::vector<DetectionResult> out;
  for (bool f : flags) out.push_back({f ? 0.9 : 0.1, f, "d"});
  return out;
}

// Maps each known word to its own basis vector.
class BasisEmbedder : public Embedder {
 public:
  BasisEmbedder() : Embedder("basis") {}

 protected:
  std::vector<double> raw_embedding(std::string_view text) const override {
    std::vector<double> v(3, 0.0);
    if (text == "x") v[0] = 1.0;
    if (text == "y") v[1] = 1.0;
    if (text == "z") v[2] = 2.0;
    return v;
  }
};

TEST(AccuracyTest, Definitions) {
  std::vector<bool> flags(200, false);
  EXPECT_EQ(detection_accuracy(results_from(flags)), 0.0);
  EXPECT_EQ(evasion_rate(results_from(flags)), 1.0);
  std::fill(flags.begin(), flags.begin() + 68, true);
  EXPECT_EQ(detection_accuracy(results_from(flags)), 0.34);
  EXPECT_EQ(round_half_up(100.0 * detection_accuracy(results_from(flags)), 2), 34.0);
  EXPECT_THROW(detection_accuracy({}), UsageError);
}

TEST(AccuracyTest, MatchesCountingOracle) {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<bool> flags(1 + rng() % 300);
    size_t hits = 0;
    for (size_t i = 0; i < flags.size(); ++i) {
      flags[i] = rng() % 3 == 0;
      hits += flags[i];
    }
    const auto r = results_from(flags);
    const double acc = detection_accuracy(r);
    EXPECT_EQ(acc, static_cast<double>(hits) / static_cast<double>(flags.size()));
    EXPECT_EQ(acc + evasion_rate(r), 1.0);
  }
}

TEST(BleuTest, Tokenize) {
  EXPECT_EQ(bleu_tokenize("  The CAT, sat... on \"mat\"! -- don't\n"),
            (std::vector<std::string>{"the", "cat", "sat", "on", "mat", "don't"}));
}

TEST(BleuTest, MatchesScriptedOracle) {
  // tests/oracles/bleu_oracle.py
  const std::vector<double> expected = {0.7611606003349892, 0.6703420896351792,
                                        5.35198818208569e-08, 0.5833510584342544};
  std::vector<std::vector<std::string>> toks;
  for (const auto& t : kBleuCorpus) toks.push_back(bleu_tokenize(t));
  for (size_t i = 0; i < toks.size(); ++i) {
    std::vector<std::vector<std::string>> refs;
    for (size_t j = 0; j < toks.size(); ++j) {
      if (j != i) refs.push_back(toks[j]);
    }
    EXPECT_NEAR(sentence_bleu(toks[i], refs), expected[i], 1e-9);
  }
  EXPECT_NEAR(self_bleu(kBleuCorpus), 0.5037134504810762, 1e-9);
}

TEST(BleuTest, IdenticalAndDisjointPairs) {
  EXPECT_EQ(self_bleu({"one two three four five", "one two three four five"}), 1.0);
  // Every precision floors at epsilon and BP = 1: exp(log(1e-9)) = 1e-9.
  EXPECT_NEAR(self_bleu({"alpha beta gamma delta", "one two three four"}), kBleuEpsilon,
              1e-20);
  EXPECT_THROW(self_bleu({"only one"}), UsageError);
}

TEST(BleuTest, BrevityPenaltyAgainstClosestReference) {
  const std::vector<std::string> cand = {"a", "b", "c"};
  // References of length 5 and 1: |5-3| = 2 = |1-3|, the shorter wins, so BP = 1.
  EXPECT_EQ(sentence_bleu(cand, {{"a", "b", "c", "d", "e"}, {"a"}}, 1), 1.0);
  EXPECT_DOUBLE_EQ(sentence_bleu(cand, {{"a", "b", "c", "d", "e"}}, 1),
                   std::exp(1.0 - 5.0 / 3.0));
  EXPECT_EQ(sentence_bleu({}, {{"a"}}), 0.0);
}

TEST(BleuTest, PermutationInvariantAndBounded) {
  auto corpus = kBleuCorpus;
  const double base = self_bleu(corpus);
  std::mt19937 rng(4);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(corpus.begin(), corpus.end(), rng);
    EXPECT_NEAR(self_bleu(corpus), base, 1e-15);
  }
  EXPECT_GE(base, 0.0);
  EXPECT_LE(base, 1.0);
}

TEST(BleuTest, DuplicateNeverDecreases) {
  const auto pool = text::read_lines(fixture("machine_pool.txt"));
  std::mt19937 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::string> corpus;
    for (int i = 0; i < 4; ++i) corpus.push_back(pool[rng() % pool.size()]);
    const double before = self_bleu(corpus);
    corpus.push_back(corpus[rng() % corpus.size()]);
    EXPECT_GE(self_bleu(corpus), before - 1e-12);
  }
}

TEST(CosineTest, IdentityOrthogonalityAndOracle) {
  BuiltinEmbedder emb("trigram", 256);
  const auto texts = text::read_lines(fixture("human_pool.txt"));
  EXPECT_NEAR(cosine_report(texts, texts, emb), 1.0, 1e-9);

  BasisEmbedder basis;
  EXPECT_NEAR(cosine_report({"x", "y"}, {"y", "z"}, basis), 0.0, 1e-9);

  const auto machine = text::read_lines(fixture("machine_pool.txt"));
  std::vector<std::string> g(machine.begin(), machine.begin() + 10);
  std::vector<std::string> h(texts.begin(), texts.begin() + 10);
  double sum = 0.0;
  for (size_t i = 0; i < 10; ++i) {
    const auto a = emb.embed(g[i]);
    const auto b = emb.embed(h[i]);
    double d = 0.0;
    for (size_t k = 0; k < a.dimension(); ++k) d += a.values()[k] * b.values()[k];
    sum += d;
  }
  EXPECT_EQ(cosine_report(g, h, emb), sum / 10.0);
  EXPECT_EQ(cosine_report(g, h, emb), cosine_report(h, g, emb));
  EXPECT_THROW(cosine_report(g, texts, emb), UsageError);
}

TEST(CosineTest, CentroidMode) {
  BasisEmbedder basis;
  // Centroids (1,1,0)/sqrt2 and (0,1,1)/sqrt2: cosine 1/2.
  EXPECT_NEAR(cosine_report({"x", "y"}, {"y", "z"}, basis, CosineMode::kCentroid), 0.5,
              1e-12);
  EXPECT_EQ(parse_cosine_mode("centroid"), CosineMode::kCentroid);
  EXPECT_THROW(parse_cosine_mode("median"), UsageError);
}

TEST(PerplexityTest, MeanOfPerTextValues) {
  UnigramScorer scorer("unigram", "a a b");
  // N = 3, |V| = 2, denominator 6: p(a) = 1/2, p(b) = 1/3.
  // PPL("a b") = sqrt(6), PPL("a a") = 2.
  EXPECT_NEAR(perplexity_report({"a b", "a a"}, scorer), (std::sqrt(6.0) + 2.0) / 2.0,
              1e-12);
  UnigramScorer four("unigram", "a a a a");
  EXPECT_EQ(perplexity_report({"a a"}, four), 1.2);
  EXPECT_EQ(perplexity_report({"a a", "a"}, four), 1.2);
  EXPECT_THROW(perplexity_report({}, four), UsageError);
}

TEST(RoundingTest, HalfUp) {
  EXPECT_EQ(round_half_up(42.375, 2), 42.38);
  EXPECT_EQ(round_half_up((34.0 + 81.0 + 33.0 + 21.5) / 4.0, 2), 42.38);
  EXPECT_EQ(round_half_up(0.42375 * 100.0, 2), 42.38);
  EXPECT_EQ(round_half_up(1.005 * 100.0, 0), 101.0);
  EXPECT_EQ(round_half_up(2.344, 2), 2.34);
  EXPECT_EQ(round_half_up(0.125, 2), 0.13);
}

TEST(MetricsReportTest, AverageAndJson) {
  MetricsReport r;
  r.label = "sda";
  r.arm = "sda";
  r.target_id = "t";
  r.detectors = {"a", "b"};
  r.detection_accuracy = {{"a", 0.34}, {"b", 0.81}};
  r.n_texts = 200;
  EXPECT_DOUBLE_EQ(*r.compute_average(), 0.575);
  r.average_accuracy = r.compute_average();
  r.self_bleu = 0.5;
  const auto back = MetricsReport::from_json(r.to_json());
  EXPECT_EQ(back.to_json(), r.to_json());
  r.detection_accuracy["b"] = std::nullopt;
  EXPECT_FALSE(r.compute_average().has_value());
  EXPECT_TRUE(r.to_json()["detection_accuracy"]["b"].is_null());
}

}  // namespace
}  // namespace sda
