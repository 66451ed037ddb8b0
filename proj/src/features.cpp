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

#include "sda/features.hpp"

#include "sda/error.hpp"
#include "sda/text_util.hpp"

namespace sda {

using nlohmann::json;

void DisguiseFeatureSet::validate() const {
  if (version < 0) throw InvariantError("feature version must be >= 0");
  if ((version == 0) != text.empty()) {
    throw InvariantError("feature text must be empty exactly at version 0");
  }
  if (parent_version && *parent_version >= version) {
    throw InvariantError("feature parent_version must precede version");
  }
}

json DisguiseFeatureSet::to_json(const json& config_echo) const {
  json j;
  j["version"] = version;
  j["text"] = text;
  j["produced_by"] = produced_by;
  j["parent_version"] = parent_version ? json(*parent_version) : json(nullptr);
  j["config_echo"] = config_echo;
  return j;
}

DisguiseFeatureSet DisguiseFeatureSet::from_json(const json& j) {
  DisguiseFeatureSet f;
  try {
    f.version = j.at("version").get<int>();
    f.text = j.at("text").get<std::string>();
    f.produced_by = j.value("produced_by", std::string());
    if (j.contains("parent_version") && !j["parent_version"].is_null()) {
      f.parent_version = j["parent_version"].get<int>();
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed feature set: ") + e.what());
  }
  f.validate();
  return f;
}

void save_features(const std::string& path, const DisguiseFeatureSet& features,
                   const json& config_echo) {
  features.validate();
  text::write_file_atomic(path, features.to_json(config_echo).dump(2) + "\n");
}

DisguiseFeatureSet load_features(const std::string& path, json* config_echo) {
  json j;
  try {
    j = json::parse(text::read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path, 1, e.what());
  }
  if (config_echo) *config_echo = j.value("config_echo", json(nullptr));
  try {
    return DisguiseFeatureSet::from_json(j);
  } catch (const Error& e) {
    throw ParseError(path, 1, e.what());
  }
}

}  // namespace sda
