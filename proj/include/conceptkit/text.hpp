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

#include <string>
#include <string_view>
#include <vector>

namespace conceptkit {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

// Splits on runs of ASCII whitespace. Empty tokens are never produced.
std::vector<std::string> tokenize(std::string_view s);

std::vector<std::string> split(std::string_view s, char delim);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Answer normalization shared by scoring and metrics: lowercase, replace
// punctuation with spaces, drop the articles a/an/the, collapse whitespace.
// Idempotent.
std::string normalize_answer(std::string_view s);

// Lowercase + article strip + whitespace collapse, punctuation kept. Used for
// the DCE answer-length filter, which counts words after removing articles.
std::string strip_articles(std::string_view s);

// Number of whitespace-separated words once articles are removed.
std::size_t answer_word_count(std::string_view s);

bool starts_with(std::string_view s, std::string_view prefix);
bool ends_with(std::string_view s, std::string_view suffix);

}  // namespace conceptkit
