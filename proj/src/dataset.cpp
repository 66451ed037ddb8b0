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

#include "sda/dataset.hpp"

#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "sda/error.hpp"
#include "sda/hashing.hpp"
#include "sda/text_util.hpp"

namespace sda {

using nlohmann::json;

CorpusFormat parse_corpus_format(const std::string& name) {
  if (name == "csv") return CorpusFormat::kCsv;
  if (name == "jsonl") return CorpusFormat::kJsonl;
  throw UsageError("unknown corpus format '" + name + "' (expected csv or jsonl)");
}

std::vector<CsvRow> parse_csv(const std::string& s, const std::string& path) {
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  size_t line = 1;
  row.line = 1;
  bool in_quotes = false;
  bool field_was_quoted = false;
  bool row_has_content = false;

  auto end_field = [&] {
    row.fields.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_row = [&] {
    end_field();
    if (row_has_content) rows.push_back(std::move(row));
    row = CsvRow{};
    row_has_content = false;
  };

  for (size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < s.size() && s[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_was_quoted) {
          throw ParseError(path, line, "stray quote inside unquoted field");
        }
        in_quotes = true;
        field_was_quoted = true;
        row_has_content = true;
        break;
      case ',':
        end_field();
        row_has_content = true;
        break;
      case '\r':
        if (i + 1 < s.size() && s[i + 1] == '\n') break;
        field.push_back(c);
        break;
      case '\n':
        end_row();
        ++line;
        row.line = line;
        break;
      default:
        if (field_was_quoted) {
          throw ParseError(path, line, "text after closing quote");
        }
        field.push_back(c);
        row_has_content = true;
    }
  }
  if (in_quotes) throw ParseError(path, line, "unterminated quoted field");
  end_row();
  return rows;
}

namespace {

struct RawRow {
  size_t line;
  std::optional<std::string> record_id;
  std::string title;
  std::string human_text;
  std::optional<std::string> genre;
};

std::vector<RawRow> read_csv_rows(const std::string& path) {
  auto rows = parse_csv(text::read_file(path), path);
  if (rows.empty()) throw ParseError(path, 1, "missing header row");
  std::unordered_map<std::string, size_t> col;
  for (size_t i = 0; i < rows[0].fields.size(); ++i) {
    col[std::string(text::trim(rows[0].fields[i]))] = i;
  }
  for (const char* required : {"title", "human_text"}) {
    if (!col.count(required)) {
      throw ParseError(path, rows[0].line,
                       std::string("header lacks column '") + required + "'");
    }
  }
  auto get = [&](const CsvRow& r, const char* name) -> std::optional<std::string> {
    auto it = col.find(name);
    if (it == col.end() || it->second >= r.fields.size()) return std::nullopt;
    return r.fields[it->second];
  };

  std::vector<RawRow> out;
  for (size_t i = 1; i < rows.size(); ++i) {
    const CsvRow& r = rows[i];
    if (r.fields.size() != rows[0].fields.size()) {
      throw ParseError(path, r.line,
                       "expected " + std::to_string(rows[0].fields.size()) +
                           " fields, found " + std::to_string(r.fields.size()));
    }
    RawRow raw{r.line, get(r, "record_id"), get(r, "title").value_or(""),
               get(r, "human_text").value_or(""), get(r, "genre")};
    if (raw.record_id && raw.record_id->empty()) raw.record_id.reset();
    if (raw.genre && raw.genre->empty()) raw.genre.reset();
    out.push_back(std::move(raw));
  }
  return out;
}

std::optional<std::string> json_string(const json& j, const char* key,
                                       const std::string& path, size_t line) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  if (j[key].is_number_integer()) return std::to_string(j[key].get<long long>());
  if (!j[key].is_string()) {
    throw ParseError(path, line, std::string("field '") + key + "' must be a string");
  }
  return j[key].get<std::string>();
}

std::vector<RawRow> read_jsonl_rows(const std::string& path) {
  std::istringstream in(text::read_file(path));
  std::vector<RawRow> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::is_blank(line)) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(path, line_no, e.what());
    }
    if (!j.is_object()) throw ParseError(path, line_no, "expected a JSON object");
    RawRow raw{line_no, json_string(j, "record_id", path, line_no),
               json_string(j, "title", path, line_no).value_or(""),
               json_string(j, "human_text", path, line_no).value_or(""),
               json_string(j, "genre", path, line_no)};
    if (raw.record_id && raw.record_id->empty()) raw.record_id.reset();
    if (raw.genre && raw.genre->empty()) raw.genre.reset();
    out.push_back(std::move(raw));
  }
  return out;
}

}  // namespace

IngestResult ingest(const std::string& path, CorpusFormat format) {
  std::vector<RawRow> raw =
      format == CorpusFormat::kCsv ? read_csv_rows(path) : read_jsonl_rows(path);
  IngestResult result;
  std::set<std::string> seen;
  for (size_t i = 0; i < raw.size(); ++i) {
    RawRow& r = raw[i];
    CorpusRecord rec;
    rec.record_id = r.record_id.value_or(std::to_string(i + 1));
    rec.title = std::string(text::trim(r.title));
    rec.human_text = std::move(r.human_text);
    rec.genre = std::move(r.genre);
    if (rec.title.empty()) {
      result.rejected.push_back({r.line, "empty title"});
      continue;
    }
    if (text::is_blank(rec.human_text)) {
      result.rejected.push_back({r.line, "empty human_text"});
      continue;
    }
    if (!seen.insert(rec.record_id).second) {
      result.rejected.push_back({r.line, "duplicate record_id " + rec.record_id});
      continue;
    }
    result.records.push_back(std::move(rec));
  }
  if (result.records.empty()) {
    throw UsageError(path + ": no valid records (" +
                     std::to_string(result.rejected.size()) + " rejected)");
  }
  return result;
}

std::vector<Query> make_queries(const std::vector<CorpusRecord>& records,
                                const std::string& query_template) {
  static const std::string kSlot = "{title}";
  if (query_template.find(kSlot) == std::string::npos) {
    throw UsageError("query template must contain {title}");
  }
  std::vector<Query> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    std::string text;
    size_t from = 0;
    for (size_t at; (at = query_template.find(kSlot, from)) != std::string::npos;
         from = at + kSlot.size()) {
      text.append(query_template, from, at - from);
      text.append(r.title);
    }
    text.append(query_template, from);
    out.push_back({r.record_id, std::move(text), r.record_id});
  }
  return out;
}

void SplitSpec::validate() const {
  for (int r : ratios) {
    if (r <= 0) throw UsageError("split ratios must be positive");
  }
  if (ratios[0] + ratios[1] + ratios[2] != 10) {
    throw UsageError("split ratios must sum to 10");
  }
}

void check_split_size(size_t n, const SplitSpec& spec) {
  spec.validate();
  if (n < 10) {
    throw UsageError("split needs at least 10 records, got " + std::to_string(n));
  }
}

std::vector<size_t> seeded_permutation(size_t n, uint64_t seed) {
  std::vector<size_t> perm(n);
  std::iota(perm.begin(), perm.end(), size_t{0});
  Lcg64 rng(seed);
  for (size_t i = n; i-- > 1;) {
    const size_t j = rng.next_u32() % (i + 1);
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

}  // namespace sda
