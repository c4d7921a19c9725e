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

#include "conceptkit/templating.hpp"

#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "conceptkit/error.hpp"
#include "conceptkit/random.hpp"
#include "conceptkit/text.hpp"

namespace conceptkit {

namespace {

const std::set<std::string>& declared_slots() {
  static const std::set<std::string> s{"DT", "OBJ", "WH", "CMD", "ADJ_TYPE"};
  return s;
}

// Literal text and slot names in pattern order; slots are tagged by a leading '\0'.
std::vector<std::string> pattern_parts(const std::string& pattern) {
  static const std::regex slot_re(R"(\b(ADJ_TYPE|DT|OBJ|WH|CMD)\b)");
  std::vector<std::string> parts;
  auto begin = std::sregex_iterator(pattern.begin(), pattern.end(), slot_re);
  std::size_t last = 0;
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    auto pos = static_cast<std::size_t>(it->position());
    if (pos > last) parts.push_back(pattern.substr(last, pos - last));
    parts.push_back(std::string(1, '\0') + it->str());
    last = pos + static_cast<std::size_t>(it->length());
  }
  if (last < pattern.size()) parts.push_back(pattern.substr(last));
  return parts;
}

bool is_slot(const std::string& part) { return !part.empty() && part[0] == '\0'; }

std::vector<std::string> slot_choices(const std::string& slot, const std::optional<std::string>& object,
                                      const std::optional<std::string>& adj_type,
                                      const SlotValues& slots) {
  if (slot == "DT") return slots.dt;
  if (slot == "WH") return slots.wh;
  if (slot == "CMD") return slots.cmd;
  if (slot == "OBJ") return object ? std::vector<std::string>{*object} : slots.obj;
  if (slot == "ADJ_TYPE") {
    if (!adj_type) throw ValidationError("adjective template used without an adjective type");
    return {*adj_type};
  }
  throw ValidationError("unknown slot " + slot);
}

void expand_into(const std::vector<std::string>& parts, std::size_t i, std::string prefix,
                 const std::optional<std::string>& object, const std::optional<std::string>& adj_type,
                 const SlotValues& slots, std::vector<std::string>& out) {
  if (i == parts.size()) {
    out.push_back(std::move(prefix));
    return;
  }
  if (!is_slot(parts[i])) {
    expand_into(parts, i + 1, prefix + parts[i], object, adj_type, slots, out);
    return;
  }
  auto choices = slot_choices(parts[i].substr(1), object, adj_type, slots);
  if (choices.empty()) throw ValidationError("empty substitution set for slot " + parts[i].substr(1));
  for (const auto& c : choices) expand_into(parts, i + 1, prefix + c, object, adj_type, slots, out);
}

std::string regex_escape(const std::string& s) {
  static const std::string special = R"(\^$.|?*+()[]{})";
  std::string out;
  for (char c : s) {
    if (special.find(c) != std::string::npos) out += '\\';
    out += c;
  }
  return out;
}

std::string alternation(const std::vector<std::string>& values) {
  std::vector<std::string> esc;
  for (const auto& v : values) esc.push_back(regex_escape(v));
  return "(?:" + join(esc, "|") + ")";
}

const std::map<std::string, AnswerType>& answer_type_names() {
  static const std::map<std::string, AnswerType> m{{"noun", AnswerType::noun},
                                                   {"adjective", AnswerType::adjective},
                                                   {"verb", AnswerType::verb},
                                                   {"entire_query", AnswerType::entire_query}};
  return m;
}

}  // namespace

std::string to_string(AnswerType t) {
  for (const auto& [name, v] : answer_type_names())
    if (v == t) return name;
  return "noun";
}

AnswerType parse_answer_type(const std::string& s) {
  auto it = answer_type_names().find(s);
  if (it == answer_type_names().end()) throw ValidationError("unknown answer type '" + s + "'");
  return it->second;
}

bool QATemplate::has_slot(std::string_view slot) const {
  for (const auto& p : pattern_parts(pattern))
    if (is_slot(p) && p.substr(1) == slot) return true;
  return false;
}

bool QATemplate::requires_object_slot() const { return has_slot("OBJ"); }

const std::vector<QATemplate>& builtin_templates() {
  using A = AnswerType;
  static const std::vector<QATemplate> table{
      {A::noun, "What is DT OBJ?"},
      {A::noun, "What OBJ is this?"},
      {A::noun, "What OBJ is that?"},
      {A::noun, "Classify DT OBJ."},
      {A::noun, "Specify DT OBJ."},
      {A::noun, "Name DT OBJ."},
      {A::adjective, "WH ADJ_TYPE is DT OBJ?"},
      {A::adjective, "What is the ADJ_TYPE of DT OBJ?"},
      {A::adjective, "CMD the ADJ_TYPE of DT OBJ."},
      {A::verb, "What is DT OBJ doing?"},
      {A::verb, "What action is DT OBJ taking?"},
      {A::verb, "What action is DT OBJ performing?"},
      {A::verb, "What action is DT OBJ carrying out?"},
      {A::verb, "What action is DT OBJ doing?"},
      {A::verb, "What activity is DT OBJ doing?"},
      {A::verb, "CMD the action being taken by DT OBJ."},
      {A::verb, "CMD the activity DT OBJ is doing."},
      {A::verb, "CMD what DT OBJ is doing."},
      {A::verb, "What is being done?"},
      {A::verb, "WH action is being done?"},
      {A::verb, "WH activity is being done?"},
      {A::verb, "WH activity is this?"},
      {A::verb, "WH action is being taken?"},
      {A::verb, "CMD the activity being done."},
      {A::verb, "CMD the action being done."},
      {A::verb, "CMD the action being taken."},
      {A::verb, "What is DT OBJ doing?"},
      {A::entire_query, "What is this?"},
      {A::entire_query, "What is that?"},
  };
  return table;
}

void validate_template(const QATemplate& tpl) {
  static const std::regex caps_word(R"(\b[A-Z][A-Z_]+\b)");
  for (auto it = std::sregex_iterator(tpl.pattern.begin(), tpl.pattern.end(), caps_word);
       it != std::sregex_iterator(); ++it) {
    if (!declared_slots().count(it->str()))
      throw ValidationError("template '" + tpl.pattern + "' uses undeclared slot " + it->str());
  }
  if (tpl.pattern.empty()) throw ValidationError("empty template pattern");
}

std::vector<QATemplate> load_templates(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::vector<QATemplate> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError(path.string(), lineno, "expected `answer_type<TAB>pattern`");
    QATemplate t{parse_answer_type(trim(line.substr(0, tab))), line.substr(tab + 1)};
    validate_template(t);
    out.push_back(std::move(t));
  }
  return out;
}

std::string serialize_templates(const std::vector<QATemplate>& templates) {
  std::ostringstream os;
  for (const auto& t : templates) os << to_string(t.answer_type) << '\t' << t.pattern << '\n';
  return os.str();
}

std::set<std::string> expand_template(const QATemplate& tpl, const std::optional<std::string>& object,
                                      const std::optional<std::string>& adj_type,
                                      const SlotValues& slots) {
  validate_template(tpl);
  std::vector<std::string> all;
  expand_into(pattern_parts(tpl.pattern), 0, "", object, adj_type, slots, all);
  return {all.begin(), all.end()};
}

std::size_t expansion_size(const QATemplate& tpl, bool object_specified, const SlotValues& slots) {
  std::size_t n = 1;
  for (const auto& p : pattern_parts(tpl.pattern)) {
    if (!is_slot(p)) continue;
    auto s = p.substr(1);
    if (s == "DT") n *= slots.dt.size();
    else if (s == "WH") n *= slots.wh.size();
    else if (s == "CMD") n *= slots.cmd.size();
    else if (s == "OBJ") n *= object_specified ? 1 : slots.obj.size();
  }
  return n;
}

std::set<std::string> question_pool(const std::vector<QATemplate>& templates, AnswerType type,
                                    QuestionVariant variant, const std::string& noun,
                                    const std::optional<std::string>& adj_type,
                                    const SlotValues& slots) {
  std::set<std::string> pool;
  for (const auto& t : templates) {
    if (t.answer_type != type) continue;
    std::optional<std::string> object;
    if (variant == QuestionVariant::object_specified) {
      if (!t.requires_object_slot()) continue;
      object = noun;
    }
    auto qs = expand_template(t, object, adj_type, slots);
    pool.insert(qs.begin(), qs.end());
  }
  return pool;
}

json to_json(const QAExample& qa) {
  return json{{"id", qa.id},           {"image_ref", qa.image_ref},
              {"question", qa.question}, {"answer", qa.answer},
              {"answer_type", to_string(qa.answer_type)}, {"query", qa.query_id}};
}

QAExample qa_from_json(const json& j) {
  QAExample qa;
  qa.id = j.at("id").get<std::string>();
  qa.image_ref = j.at("image_ref").get<std::string>();
  qa.question = j.at("question").get<std::string>();
  qa.answer = j.at("answer").get<std::string>();
  qa.answer_type = parse_answer_type(j.at("answer_type").get<std::string>());
  qa.query_id = j.at("query").get<std::string>();
  return qa;
}

std::vector<QAExample> generate_qas(const PairQuery& query, const std::string& image_ref,
                                    std::uint64_t seed, const std::vector<QATemplate>& templates,
                                    const SlotValues& slots) {
  const std::string qid = query.id();
  const std::string base = qid + "#" + hex64(fnv1a64(image_ref));
  std::vector<QAExample> out;

  auto emit = [&](const std::string& tag, AnswerType type, QuestionVariant variant,
                  const std::string& answer, const std::optional<std::string>& adj_type) {
    auto pool = question_pool(templates, type, variant, query.noun.surface, adj_type, slots);
    if (pool.empty())
      throw ValidationError("no templates available for " + to_string(type) + " questions");
    auto rng = Rng::keyed(seed, {qid, image_ref, tag});
    auto it = pool.begin();
    std::advance(it, static_cast<std::ptrdiff_t>(rng.below(pool.size())));
    out.push_back({base + ":" + tag, image_ref, *it, answer, type, qid});
  };

  emit("noun", AnswerType::noun, QuestionVariant::generic, query.noun.surface, std::nullopt);
  if (query.modifier) {
    const auto& m = *query.modifier;
    if (m.pos == PartOfSpeech::adjective) {
      emit("adjective", AnswerType::adjective, QuestionVariant::generic, m.surface, m.adj_type);
      emit("adjective_obj", AnswerType::adjective, QuestionVariant::object_specified, m.surface, m.adj_type);
    } else {
      emit("verb", AnswerType::verb, QuestionVariant::generic, m.surface, std::nullopt);
      emit("verb_obj", AnswerType::verb, QuestionVariant::object_specified, m.surface, std::nullopt);
    }
  }
  emit("query", AnswerType::entire_query, QuestionVariant::generic, query.query_text, std::nullopt);
  return out;
}

std::size_t qas_per_image(QueryKind kind) { return kind == QueryKind::noun ? 2 : 4; }

std::set<AnswerType> classify_question(const std::string& question,
                                       const std::vector<QATemplate>& templates,
                                       const std::vector<std::string>& objects,
                                       const std::vector<std::string>& adj_types,
                                       const SlotValues& slots) {
  std::vector<std::string> obj_values = slots.obj;
  obj_values.insert(obj_values.end(), objects.begin(), objects.end());
  const std::string adj_alt = adj_types.empty() ? "(?:[a-z]+(?: [a-z]+)*)" : alternation(adj_types);

  std::set<AnswerType> out;
  for (const auto& t : templates) {
    std::string re = "^";
    for (const auto& p : pattern_parts(t.pattern)) {
      if (!is_slot(p)) {
        re += regex_escape(p);
        continue;
      }
      auto s = p.substr(1);
      if (s == "DT") re += alternation(slots.dt);
      else if (s == "WH") re += alternation(slots.wh);
      else if (s == "CMD") re += alternation(slots.cmd);
      else if (s == "OBJ") re += alternation(obj_values);
      else re += adj_alt;
    }
    re += "$";
    if (std::regex_match(question, std::regex(re))) out.insert(t.answer_type);
  }
  return out;
}

PromptTask parse_prompt_task(const std::string& s) {
  if (s == "classification") return PromptTask::classification;
  if (s == "cic") return PromptTask::cic;
  if (s == "localization") return PromptTask::localization;
  if (s == "captioning") return PromptTask::captioning;
  throw ValidationError("unknown prompt task '" + s + "'");
}

const std::vector<std::string>& prompt_pool(PromptTask task) {
  static const std::vector<std::string> cls{
      "What is this object?",        "What object is this?",    "What is this?",
      "What is that object?",        "Classify this object.",   "Name this object.",
      "Specify the object shown.",   "What kind of object is this?"};
  static const std::vector<std::string> loc{
      "Localize {}",        "Locate {}",           "Find the {}",     "Locate all instances of {}",
      "Find all instances of {}", "Where are the {}?", "Localize all the {}"};
  static const std::vector<std::string> cap{
      "Generate a caption.",        "Describe this image.",        "Caption this image.",
      "What is happening in this image?", "Write a description of the image."};
  switch (task) {
    case PromptTask::classification:
    case PromptTask::cic: return cls;
    case PromptTask::localization: return loc;
    case PromptTask::captioning: return cap;
  }
  return cls;
}

namespace {

std::string fill_category(const std::string& prompt, PromptTask task,
                          const std::optional<std::string>& category) {
  if (task != PromptTask::localization) return prompt;
  if (!category || trim(*category).empty())
    throw ValidationError("localization prompts require a category");
  auto pos = prompt.find("{}");
  return prompt.substr(0, pos) + trim(*category) + prompt.substr(pos + 2);
}

std::string task_name(PromptTask t) {
  switch (t) {
    case PromptTask::classification: return "classification";
    case PromptTask::cic: return "cic";
    case PromptTask::localization: return "localization";
    case PromptTask::captioning: return "captioning";
  }
  return "";
}

}  // namespace

std::string task_prompt(PromptTask task, std::uint64_t seed, const std::optional<std::string>& category) {
  const auto& pool = prompt_pool(task);
  auto rng = Rng::keyed(seed, {task_name(task), category.value_or("")});
  return fill_category(pool[rng.below(pool.size())], task, category);
}

std::string canonical_prompt(PromptTask task, const std::optional<std::string>& category) {
  return fill_category(prompt_pool(task).front(), task, category);
}

}  // namespace conceptkit
