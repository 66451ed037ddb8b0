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

#include "sda/manifest.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>

#include "sda/error.hpp"
#include "sda/text_util.hpp"

namespace sda {

using nlohmann::json;

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool RunManifest::records_output(const std::string& path) const {
  namespace fs = std::filesystem;
  const auto want = fs::weakly_canonical(fs::absolute(path));
  for (const auto& [name, stage] : stages) {
    if (!stage.complete) continue;
    for (const auto& [role, p] : stage.outputs) {
      if (fs::weakly_canonical(fs::absolute(p)) == want) return true;
    }
  }
  return false;
}

json RunManifest::to_json() const {
  json st = json::object();
  for (const auto& [name, s] : stages) {
    json j = {{"config_hash", s.config_hash},
              {"outputs", s.outputs},
              {"completed_at", s.completed_at},
              {"complete", s.complete}};
    if (!s.error.empty()) j["error"] = s.error;
    st[name] = std::move(j);
  }
  return {{"run_id", run_id},
          {"config_hash", config_hash},
          {"stages", st},
          {"created_at", created_at},
          {"updated_at", updated_at}};
}

RunManifest RunManifest::from_json(const json& j) {
  RunManifest m;
  try {
    m.run_id = j.at("run_id").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.created_at = j.value("created_at", std::string());
    m.updated_at = j.value("updated_at", std::string());
    for (const auto& [name, s] : j.at("stages").items()) {
      StageRecord r;
      r.config_hash = s.at("config_hash").get<std::string>();
      r.outputs = s.at("outputs").get<std::map<std::string, std::string>>();
      r.completed_at = s.value("completed_at", std::string());
      r.complete = s.value("complete", true);
      r.error = s.value("error", std::string());
      m.stages[name] = std::move(r);
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

void RunManifest::save(const std::string& path) const {
  text::write_file_atomic(path, to_json().dump(2) + "\n");
}

RunManifest RunManifest::load(const std::string& path) {
  json j;
  try {
    j = json::parse(text::read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path, 1, e.what());
  }
  return from_json(j);
}

RunManifest RunManifest::load_or_create(const std::string& path,
                                        const std::string& config_hash) {
  if (std::filesystem::exists(path)) return load(path);
  RunManifest m;
  m.run_id = "run-" + config_hash.substr(0, 12);
  m.config_hash = config_hash;
  m.created_at = utc_timestamp();
  m.updated_at = m.created_at;
  return m;
}

}  // namespace sda
