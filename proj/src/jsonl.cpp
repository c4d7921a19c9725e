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

#include "conceptkit/jsonl.hpp"

#include <fstream>

#include "conceptkit/error.hpp"
#include "conceptkit/text.hpp"

namespace conceptkit {

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

json ArtifactHeader::to_json() const {
  return json{{"command", command}, {"config_hash", config_hash}, {"seed", seed}};
}

std::string dump_line(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::strict); }

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& records,
                 const std::optional<ArtifactHeader>& header) {
  auto out = open_out(path);
  if (header) out << dump_line(json{{kHeaderKey, header->to_json()}}) << '\n';
  for (const auto& r : records) out << dump_line(r) << '\n';
  if (!out) throw RuntimeFailure("write failed for '" + path.string() + "'");
}

void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const json&, std::size_t)>& fn) {
  auto in = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(path.string(), lineno, std::string("malformed JSON: ") + e.what());
    }
    if (j.is_object() && j.contains(kHeaderKey)) continue;
    fn(j, lineno);
  }
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::vector<json> out;
  for_each_jsonl(path, [&](const json& j, std::size_t) { out.push_back(j); });
  return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    out.push_back(std::move(t));
  }
  return out;
}

void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines,
                 const std::optional<ArtifactHeader>& header) {
  auto out = open_out(path);
  if (header) {
    out << "# command=" << header->command << " config_hash=" << header->config_hash
        << " seed=" << header->seed << '\n';
  }
  for (const auto& l : lines) out << l << '\n';
  if (!out) throw RuntimeFailure("write failed for '" + path.string() + "'");
}

json read_json(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw RuntimeFailure("write failed for '" + path.string() + "'");
}

}  // namespace conceptkit
