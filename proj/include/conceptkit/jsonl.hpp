/* Copyright 2026 The conceptkit Authors. All Rights Reserved.

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

#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace conceptkit {

using json = nlohmann::json;

// Provenance written as the first record of every artifact the CLI produces.
// JSON-Lines artifacts carry it as {"_header": {...}}; plain line files as a
// leading "# key=value ..." comment.
struct ArtifactHeader {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;

  json to_json() const;
};

inline constexpr const char* kHeaderKey = "_header";

// Serializes with sorted keys and no whitespace so equal values give equal bytes.
std::string dump_line(const json& j);

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& records,
                 const std::optional<ArtifactHeader>& header = std::nullopt);

// Calls fn(record, line_number) for every non-header, non-blank line.
// Throws ParseError naming the line on malformed JSON.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const json&, std::size_t)>& fn);

std::vector<json> read_jsonl(const std::filesystem::path& path);

// Plain line files: one value per line, '#' comments and blank lines skipped.
std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines,
                 const std::optional<ArtifactHeader>& header = std::nullopt);

json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& j);

}  // namespace conceptkit
