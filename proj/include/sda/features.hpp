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

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sda {

// Natural-language description of human-like writing traits. Version 0 is the
// empty starting point; each update produces version + 1.
struct DisguiseFeatureSet {
  int version = 0;
  std::string text;
  std::string produced_by;
  std::optional<int> parent_version;

  // version 0 <=> empty text; parent_version < version when present.
  void validate() const;
  nlohmann::json to_json(const nlohmann::json& config_echo = nullptr) const;
  static DisguiseFeatureSet from_json(const nlohmann::json& j);
};

void save_features(const std::string& path, const DisguiseFeatureSet& features,
                   const nlohmann::json& config_echo);
DisguiseFeatureSet load_features(const std::string& path,
                                 nlohmann::json* config_echo = nullptr);

}  // namespace sda
