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
#include <string>

#include <nlohmann/json.hpp>

namespace sda {

struct StageRecord {
  std::string config_hash;
  std::map<std::string, std::string> outputs;  // role -> path
  std::string completed_at;                    // timestamp
  bool complete = true;
  std::string error;                           // set when complete is false

  bool operator==(const StageRecord&) const = default;
};

// Records each stage's outputs under the workdir. Written atomically.
struct RunManifest {
  std::string run_id;
  std::string config_hash;
  std::map<std::string, StageRecord> stages;
  std::string created_at;
  std::string updated_at;

  bool records_output(const std::string& path) const;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);

  void save(const std::string& path) const;
  static RunManifest load(const std::string& path);
  // Empty manifest if the file does not exist.
  static RunManifest load_or_create(const std::string& path,
                                    const std::string& config_hash);
};

// ISO-8601 UTC, seconds resolution.
std::string utc_timestamp();

}  // namespace sda
