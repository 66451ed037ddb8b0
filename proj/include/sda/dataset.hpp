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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sda {

struct CorpusRecord {
  std::string record_id;
  std::string title;
  std::string human_text;
  std::optional<std::string> genre;

  bool operator==(const CorpusRecord&) const = default;
};

struct Query {
  std::string query_id;
  std::string text;
  std::string source_record;

  bool operator==(const Query&) const = default;
};

enum class CorpusFormat { kCsv, kJsonl };
CorpusFormat parse_corpus_format(const std::string& name);

struct RejectedRow {
  size_t line = 0;  // 1-based physical line where the row starts
  std::string reason;
};

struct IngestResult {
  std::vector<CorpusRecord> records;
  std::vector<RejectedRow> rejected;
};

// Reads a corpus file. Rows failing validation (empty title or text,
// duplicate record_id) are rejected and reported; a file that cannot be
// parsed at all, or that yields no valid record, throws. A missing
// record_id defaults to the 1-based ordinal of the data row.
IngestResult ingest(const std::string& path, CorpusFormat format);

// RFC 4180 CSV: quoted fields may contain commas, quotes ("") and newlines.
// Each row carries the physical line it started on.
struct CsvRow {
  size_t line = 0;
  std::vector<std::string> fields;
};
std::vector<CsvRow> parse_csv(const std::string& contents,
                              const std::string& path_for_errors);

inline constexpr const char* kAbstractQueryTemplate =
    "Write the abstract for the academic paper titled '{title}'.";

// One query per record; {title} is substituted verbatim.
std::vector<Query> make_queries(const std::vector<CorpusRecord>& records,
                                const std::string& query_template =
                                    kAbstractQueryTemplate);

struct SplitSpec {
  std::array<int, 3> ratios = {6, 2, 2};  // train, val, test; sum to 10
  uint64_t seed = 0;

  void validate() const;
};

template <typename T>
struct Split {
  std::vector<T> train;
  std::vector<T> val;
  std::vector<T> test;
};

// Seeded Fisher-Yates permutation of 0..n-1: for i = n-1 down to 1,
// j = (upper 32 bits of the next Lcg64 state) mod (i + 1), swap(i, j).
std::vector<size_t> seeded_permutation(size_t n, uint64_t seed);

// Sizes floor(n*train/10), floor(n*val/10), remainder to test.
template <typename T>
Split<T> split(const std::vector<T>& items, const SplitSpec& spec);

void check_split_size(size_t n, const SplitSpec& spec);

template <typename T>
Split<T> split(const std::vector<T>& items, const SplitSpec& spec) {
  check_split_size(items.size(), spec);
  const size_t n = items.size();
  const size_t n_train = n * static_cast<size_t>(spec.ratios[0]) / 10;
  const size_t n_val = n * static_cast<size_t>(spec.ratios[1]) / 10;
  const auto perm = seeded_permutation(n, spec.seed);
  Split<T> out;
  for (size_t i = 0; i < n; ++i) {
    const T& item = items[perm[i]];
    if (i < n_train) {
      out.train.push_back(item);
    } else if (i < n_train + n_val) {
      out.val.push_back(item);
    } else {
      out.test.push_back(item);
    }
  }
  return out;
}

}  // namespace sda
