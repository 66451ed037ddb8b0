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

#include <string>
#include <string_view>
#include <vector>

namespace sda::text {

bool is_space(char c);
bool is_blank(std::string_view s);
std::string_view trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);

// Whitespace-separated tokens, no normalization.
std::vector<std::string_view> split_whitespace(std::string_view s);

// Joins with `sep`.
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Reads a whole file; throws UsageError when unreadable.
std::string read_file(const std::string& path);

// Writes via a temporary sibling file and rename, so readers never observe a
// partially written file.
void write_file_atomic(const std::string& path, std::string_view contents);

// One entry per non-blank line, with a trailing '\r' stripped.
std::vector<std::string> read_lines(const std::string& path);

}  // namespace sda::text
