// Copyright 2026 The Detox Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace detox {

inline constexpr const char* kToolName = "detox";
inline constexpr const char* kToolVersion = "0.1.0";

// SHA-256 of raw bytes, lowercase hex.
std::string sha256_hex(std::string_view data);

// Digest of lowercased, whitespace-collapsed text. Used as the cache key
// for scorers so trivially reformatted text hits the same entry.
std::string normalized_text_digest(std::string_view text);

std::string read_file(const std::filesystem::path& path);
std::vector<std::string> read_lines(const std::filesystem::path& path);
std::string file_digest(const std::filesystem::path& path);

// Writes to a temp file in the target directory, then renames into place.
// Readers never observe a partially written file.
void atomic_write_file(const std::filesystem::path& path,
                       std::string_view content);

// Provenance block embedded in every structured output file.
nlohmann::json make_provenance(std::string_view config_digest);

}  // namespace detox
