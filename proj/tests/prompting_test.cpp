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

#include "sda/prompting.hpp"

#include <algorithm>
#include <cstdlib>
#include <random>

#include <gtest/gtest.h>

#include "sda/error.hpp"
#include "sda/text_util.hpp"
#include "test_support.hpp"

namespace sda {
namespace {

using testing::fixture;

const std::vector<std::string> kExamples = {
    "We measured the drift twice, once at dawn and once at noon.",
    "My notes, sadly, were incomplete; our second pass fixed that.",
    "I doubt the {features} placeholder survives here, and that's fine.",
    "Results held across seeds, though the variance was \"large\".",
    "Our group, small as it is, ran every ablation by hand.",
};

const std::vector<std::string> kCharacteristics = {
    "syntactic structure", "grammatical structure", "language style",
    "punctuation usage", "vocabulary choice"};

const std::string kQuery =
    "Write the abstract for the academic paper titled 'Sparse Attention at Scale'.";

DisguiseFeatureSet features_v1() {
  DisguiseFeatureSet f;
  f.version = 1;
  f.text = "FEATURES-ACTIVE Mix short and long sentences, use commas freely";
  f.produced_by = "features";
  f.parent_version = 0;
  return f;
}

// Compares against tests/fixtures/golden/<name>; SDA_UPDATE_GOLDENS=1
// rewrites the file instead.
void expect_golden(const std::string& name, const std::string& actual) {
  const std::string path = fixture("golden/" + name);
  if (std::getenv("SDA_UPDATE_GOLDENS") != nullptr) {
    text::write_file_atomic(path, actual);
  }
  EXPECT_EQ(text::read_file(path), actual) << "golden " << name;
}

size_t parts_size(const PromptParts& p) {
  size_t n = p.instruction.size() + (p.features ? p.features->size() : 0);
  for (const auto& e : p.examples) n += e.size();
  return n;
}

TEST(PromptTemplateTest, SinglePassSubstitution) {
  PromptTemplate t("t", "A {x} B {y} {not an id} {}");
  EXPECT_EQ(t.placeholders(), (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(t.render({{"x", "{y}"}, {"y", "{x}"}}), "A {y} B {x} {not an id} {}");
  EXPECT_THROW(t.render({{"x", "1"}}), UsageError);
  EXPECT_EQ(t.scaffold_size(), t.body().size() - 6);
}

TEST(PromptLibraryTest, LoadRejectsMissingPlaceholder) {
  const auto dir = testing::temp_dir("templates");
  for (const char* name : {"generation", "feature-construction", "disguise-examples",
                           "disguise-features", "disguise-task"}) {
    std::filesystem::copy_file(std::string(SDA_TEMPLATES_DIR) + "/" + name + ".txt",
                               dir / (std::string(name) + ".txt"));
  }
  EXPECT_NO_THROW(PromptLibrary::load(dir.string()));
  text::write_file_atomic((dir / "disguise-task.txt").string(), "Task:\nno query here\n");
  EXPECT_THROW(PromptLibrary::load(dir.string()), UsageError);
  std::filesystem::remove_all(dir);
}

TEST(GenerationPromptTest, EmptyFeaturesLeaveEmptySlot) {
  const auto lib = testing::prompts();
  const auto b = lib.render_generation_prompt(kQuery, DisguiseFeatureSet{});
  EXPECT_NE(b.final_text.find(
                "The features of texts resembling human writing are as follows: ."),
            std::string::npos);
  EXPECT_EQ(b.final_text.rfind(kQuery, 0), 0u);
}

TEST(GenerationPromptTest, FeaturesFillSlotAndRenderIsPure) {
  const auto lib = testing::prompts();
  DisguiseFeatureSet f;
  f.version = 1;
  f.text = "F1";
  f.parent_version = 0;
  const auto a = lib.render_generation_prompt(kQuery, f, "q-1");
  EXPECT_NE(a.final_text.find("are as follows: F1."), std::string::npos);
  EXPECT_EQ(a.query_id, "q-1");
  EXPECT_EQ(a.final_text, lib.render_generation_prompt(kQuery, f).final_text);
}

TEST(FeaturePromptTest, ContainsEveryExampleAndCharacteristic) {
  const auto lib = testing::prompts();
  const auto b = lib.render_feature_prompt(kExamples, kCharacteristics);
  for (const auto& e : kExamples) EXPECT_NE(b.final_text.find(e), std::string::npos) << e;
  for (const auto& c : kCharacteristics) {
    EXPECT_NE(b.final_text.find(c), std::string::npos) << c;
  }
  EXPECT_NE(b.final_text.find("Disregard the thematic content"), std::string::npos);
  EXPECT_THROW(lib.render_feature_prompt({}, kCharacteristics), InvariantError);
}

TEST(FeaturePromptTest, CharacteristicOrderFollowsInput) {
  const auto lib = testing::prompts();
  auto reversed = kCharacteristics;
  std::reverse(reversed.begin(), reversed.end());
  const auto b = lib.render_feature_prompt(kExamples, reversed);
  size_t last = 0;
  for (const auto& c : reversed) {
    const size_t at = b.final_text.find("- " + c);
    ASSERT_NE(at, std::string::npos);
    EXPECT_GT(at, last);
    last = at;
  }
}

TEST(DisguisePromptTest, SectionsInFixedOrder) {
  const auto lib = testing::prompts();
  const auto b = lib.render_disguise_prompt(kQuery, features_v1(), kExamples, "q-9");
  const size_t ex = b.final_text.find("Examples:");
  const size_t feat = b.final_text.find("Writing features:");
  const size_t task = b.final_text.find("Task:");
  EXPECT_EQ(ex, 0u);
  EXPECT_LT(ex, feat);
  EXPECT_LT(feat, task);
  for (const auto& e : kExamples) EXPECT_NE(b.final_text.find(e), std::string::npos);
  EXPECT_NE(b.final_text.find(features_v1().text), std::string::npos);
  EXPECT_NE(b.final_text.find(kQuery, task), std::string::npos);
  EXPECT_EQ(b.parts.examples, kExamples);
  EXPECT_EQ(b.parts.features, features_v1().text);
}

TEST(DisguisePromptTest, OmittedSections) {
  const auto lib = testing::prompts();
  const auto no_ex = lib.render_disguise_prompt(kQuery, features_v1(), {});
  EXPECT_EQ(no_ex.final_text.find("Examples:"), std::string::npos);
  EXPECT_EQ(no_ex.final_text.rfind("Writing features:", 0), 0u);
  const auto bare = lib.render_disguise_prompt(kQuery, DisguiseFeatureSet{}, {});
  EXPECT_EQ(bare.final_text, "Task:\n" + kQuery + "\n");
  EXPECT_FALSE(bare.parts.features.has_value());
}

TEST(PromptGoldenTest, AllFamiliesMatchGoldens) {
  const auto lib = testing::prompts();
  expect_golden("generation_v0.txt",
                lib.render_generation_prompt(kQuery, DisguiseFeatureSet{}).final_text);
  expect_golden("generation_v1.txt",
                lib.render_generation_prompt(kQuery, features_v1()).final_text);
  expect_golden("feature_construction.txt",
                lib.render_feature_prompt(kExamples, kCharacteristics).final_text);
  expect_golden("disguise_full.txt",
                lib.render_disguise_prompt(kQuery, features_v1(), kExamples).final_text);
  expect_golden("disguise_no_examples.txt",
                lib.render_disguise_prompt(kQuery, features_v1(), {}).final_text);
}

TEST(PromptPropertyTest, ExamplesPassThroughVerbatim) {
  const auto lib = testing::prompts();
  std::mt19937 rng(5);
  const std::string alphabet = "ab {}\"'\\features query examples\n";
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> examples(1 + rng() % 5);
    for (auto& e : examples) {
      e.resize(1 + rng() % 80);
      for (auto& c : e) c = alphabet[rng() % alphabet.size()];
      e = "x" + e;
    }
    const auto d = lib.render_disguise_prompt(kQuery, features_v1(), examples);
    const auto f = lib.render_feature_prompt(examples, kCharacteristics);
    for (const auto& e : examples) {
      EXPECT_NE(d.final_text.find(e), std::string::npos);
      EXPECT_NE(f.final_text.find(e), std::string::npos);
    }
  }
}

TEST(PromptPropertyTest, ScaffoldingOverheadBounded) {
  const auto lib = testing::prompts();
  EXPECT_LE(lib.scaffold_bound(5, 5), 500u);
  std::vector<PromptBundle> bundles = {
      lib.render_generation_prompt(kQuery, features_v1()),
      lib.render_feature_prompt(kExamples, kCharacteristics),
      lib.render_disguise_prompt(kQuery, features_v1(), kExamples),
      lib.render_disguise_prompt(kQuery, DisguiseFeatureSet{}, {})};
  for (const auto& b : bundles) {
    EXPECT_LE(b.final_text.size(), parts_size(b.parts) + lib.scaffold_bound(5, 5));
    EXPECT_LE(b.final_text.size() - parts_size(b.parts), 500u);
  }
}

TEST(PromptPartsTest, DigestTracksParts) {
  const auto lib = testing::prompts();
  const auto a = lib.render_disguise_prompt(kQuery, features_v1(), kExamples);
  const auto b = lib.render_disguise_prompt(kQuery, features_v1(), kExamples);
  const auto c = lib.render_disguise_prompt(kQuery, features_v1(), {});
  EXPECT_EQ(a.parts.digest(), b.parts.digest());
  EXPECT_NE(a.parts.digest(), c.parts.digest());
  EXPECT_EQ(a.parts.digest().size(), 16u);
}

}  // namespace
}  // namespace sda
