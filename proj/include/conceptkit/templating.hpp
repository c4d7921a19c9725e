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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "conceptkit/jsonl.hpp"
#include "conceptkit/lexicon.hpp"

namespace conceptkit {

enum class AnswerType { noun, adjective, verb, entire_query };

std::string to_string(AnswerType t);
AnswerType parse_answer_type(const std::string& s);

// A question pattern. Slots are the whole words DT, OBJ, WH, CMD, ADJ_TYPE.
struct QATemplate {
  AnswerType answer_type = AnswerType::noun;
  std::string pattern;

  bool requires_object_slot() const;
  bool has_slot(std::string_view slot) const;
};

// Substitution sets for the generic slots.
struct SlotValues {
  std::vector<std::string> dt{"the", "this", "that"};
  std::vector<std::string> obj{"entity", "object"};
  std::vector<std::string> wh{"What", "Which"};
  std::vector<std::string> cmd{"Describe", "State", "Specify", "Name"};
};

// The web QA template table, rows in their canonical order.
const std::vector<QATemplate>& builtin_templates();

// Parses `answer_type<TAB>pattern` rows; throws on unknown answer types or
// undeclared slots.
std::vector<QATemplate> load_templates(const std::filesystem::path& path);
std::string serialize_templates(const std::vector<QATemplate>& templates);

// Throws ValidationError when the pattern uses an all-caps word that is not a
// declared slot.
void validate_template(const QATemplate& tpl);

// Full cross-product of slot substitutions. When `object` is set it replaces
// OBJ (object-specified questions); otherwise OBJ ranges over slots.obj.
// ADJ_TYPE is replaced by `adj_type`, which is required if the pattern uses it.
std::set<std::string> expand_template(const QATemplate& tpl,
                                      const std::optional<std::string>& object = std::nullopt,
                                      const std::optional<std::string>& adj_type = std::nullopt,
                                      const SlotValues& slots = {});

// Number of strings expand_template produces before deduplication.
std::size_t expansion_size(const QATemplate& tpl, bool object_specified, const SlotValues& slots = {});

enum class QuestionVariant { generic, object_specified };

// Union of expansions for every template of `type`. For object-specified
// verb/adjective questions only templates with an OBJ slot take part.
std::set<std::string> question_pool(const std::vector<QATemplate>& templates, AnswerType type,
                                    QuestionVariant variant, const std::string& noun,
                                    const std::optional<std::string>& adj_type,
                                    const SlotValues& slots = {});

struct QAExample {
  std::string id;
  std::string image_ref;
  std::string question;
  std::string answer;
  AnswerType answer_type = AnswerType::noun;
  std::string query_id;

  bool operator==(const QAExample&) const = default;
};

json to_json(const QAExample& qa);
QAExample qa_from_json(const json& j);

// QAs for one query-image pair: one noun question, two verb or adjective
// questions (generic and object-specified) for pair queries, and one question
// answered by the whole query. Each question is drawn uniformly from its pool
// using a stream keyed by (seed, query id, image_ref, question slot), so the
// output does not depend on generation order.
std::vector<QAExample> generate_qas(const PairQuery& query, const std::string& image_ref,
                                    std::uint64_t seed,
                                    const std::vector<QATemplate>& templates = builtin_templates(),
                                    const SlotValues& slots = {});

// QAs generated per image for each query kind.
std::size_t qas_per_image(QueryKind kind);

// Answer types whose template family matches `question`. `objects` lists the
// nouns that may fill OBJ besides the generic values; `adj_types` the values
// ADJ_TYPE may take (any lowercase words when empty).
std::set<AnswerType> classify_question(const std::string& question,
                                       const std::vector<QATemplate>& templates,
                                       const std::vector<std::string>& objects,
                                       const std::vector<std::string>& adj_types,
                                       const SlotValues& slots = {});

enum class PromptTask { classification, cic, localization, captioning };

PromptTask parse_prompt_task(const std::string& s);

// Prompt pool for a task; localization entries contain "{}" for the category.
const std::vector<std::string>& prompt_pool(PromptTask task);

// A prompt drawn from the task's pool by a stream keyed on the seed, task and
// category. Localization requires a category.
std::string task_prompt(PromptTask task, std::uint64_t seed,
                        const std::optional<std::string>& category = std::nullopt);

// The first pool entry, e.g. "What is this object?" or "Localize dog".
std::string canonical_prompt(PromptTask task, const std::optional<std::string>& category = std::nullopt);

inline constexpr const char* kLocatePeoplePrompt = "Locate the people";
inline constexpr const char* kPersonActionPrompt = "What is this person doing?";

}  // namespace conceptkit
