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

#include <algorithm>
#include <cstdio>
#include <set>

#include "sda/error.hpp"
#include "sda/runner.hpp"
#include "sda/text_util.hpp"

namespace sda {

using nlohmann::json;

namespace {

constexpr const char* kAverageFootnote =
    "Accuracy in percent. Average is the mean of the unrounded per-detector "
    "accuracies, rounded half-up to 2 decimals\n"
    "(e.g. 34.00, 81.00, 33.00, 21.50 -> mean 42.375 -> 42.38; a table that "
    "rounds this mean differently would show 42.39).\n";

std::string percent_cell(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", round_half_up(*v * 100.0, 2));
  return buf;
}

std::string csv_value(const std::optional<double>& v) {
  return v ? json(*v).dump() : std::string();
}

std::string pad_left(const std::string& s, size_t w) {
  return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, size_t w) {
  return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

}  // namespace

ReportOutputs render_report(const std::vector<MetricsReport>& reports) {
  if (reports.empty()) throw UsageError("report needs at least one metrics file");
  const std::vector<std::string>& columns = reports.front().detectors;
  const std::set<std::string> expected(columns.begin(), columns.end());
  for (const auto& r : reports) {
    const std::set<std::string> got(r.detectors.begin(), r.detectors.end());
    if (got != expected) {
      std::string msg = "inconsistent detector sets: '" + reports.front().label + "' has {" +
                        text::join(columns, ", ") + "} but '" + r.label + "' has {" +
                        text::join(r.detectors, ", ") + "}";
      throw UsageError(msg);
    }
  }

  std::vector<std::string> header = {"Method"};
  header.insert(header.end(), columns.begin(), columns.end());
  header.push_back("Average");

  std::vector<std::vector<std::string>> rows;
  for (const auto& r : reports) {
    std::vector<std::string> row = {r.label.empty() ? r.arm : r.label};
    for (const auto& d : columns) row.push_back(percent_cell(r.detection_accuracy.at(d)));
    row.push_back(percent_cell(r.compute_average()));
    rows.push_back(std::move(row));
  }

  std::vector<size_t> width(header.size());
  for (size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : rows) width[c] = std::max(width[c], row[c].size());
  }

  auto render_row = [&](const std::vector<std::string>& cells) {
    std::string line;
    for (size_t c = 0; c < cells.size(); ++c) {
      if (c > 0) line += " | ";
      line += c == 0 ? pad_right(cells[c], width[c]) : pad_left(cells[c], width[c]);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    return line + "\n";
  };

  ReportOutputs out;
  out.table += render_row(header);
  std::string rule;
  for (size_t c = 0; c < width.size(); ++c) {
    if (c > 0) rule += "-+-";
    rule += std::string(width[c], '-');
  }
  out.table += rule + "\n";
  for (const auto& row : rows) out.table += render_row(row);
  out.table += "\n";
  out.table += kAverageFootnote;

  out.csv = "method";
  for (const auto& d : columns) out.csv += "," + d;
  out.csv += ",average\n";
  for (const auto& r : reports) {
    out.csv += r.label.empty() ? r.arm : r.label;
    for (const auto& d : columns) out.csv += "," + csv_value(r.detection_accuracy.at(d));
    out.csv += "," + csv_value(r.compute_average()) + "\n";
  }
  return out;
}

ReportOutputs cmd_report(const std::vector<std::string>& metrics_paths) {
  std::vector<MetricsReport> reports;
  for (const auto& path : metrics_paths) {
    json j;
    try {
      j = json::parse(text::read_file(path));
    } catch (const json::parse_error& e) {
      throw ParseError(path, 1, e.what());
    }
    reports.push_back(MetricsReport::from_json(j));
  }
  return render_report(reports);
}

}  // namespace sda
