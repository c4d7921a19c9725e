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

#include <set>

#include "conceptkit/error.hpp"
#include "conceptkit/templating.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace conceptkit;

namespace {

Concept adj(const std::string& s, const std::string& type) {
  auto c = make_concept(s, PartOfSpeech::adjective);
  c.adj_type = type;
  return c;
}

PairQuery brown_dog() { return make_pair_query(make_concept("dog", PartOfSpeech::noun), adj("brown", "color"), 5); }

PairQuery dog_running() {
  return make_pair_query(make_concept("dog", PartOfSpeech::noun), make_concept("running", PartOfSpeech::verb), 5);
}

std::size_t slot_product(const QATemplate& t, bool object_specified) {
  SlotValues s;
  std::size_t n = 1;
  if (t.has_slot("DT")) n *= s.dt.size();
  if (t.has_slot("OBJ") && !object_specified) n *= s.obj.size();
  if (t.has_slot("WH")) n *= s.wh.size();
  if (t.has_slot("CMD")) n *= s.cmd.size();
  return n;
}

}  // namespace

TEST_CASE("built-in table has the expected shape") {
  const auto& t = builtin_templates();
  std::map<AnswerType, int> counts;
  for (const auto& x : t) ++counts[x.answer_type];
  CHECK(t.size() == 29);
  CHECK(counts[AnswerType::noun] == 6);
  CHECK(counts[AnswerType::adjective] == 3);
  CHECK(counts[AnswerType::verb] == 18);
  CHECK(counts[AnswerType::entire_query] == 2);
  CHECK(serialize_templates(t) == testutil::read_file(std::string(FIXTURE_DIR) + "/web_templates.tsv"));
}

TEST_CASE("expand_template cross products") {
  QATemplate t{AnswerType::noun, "What is DT OBJ?"};
  auto e = expand_template(t);
  CHECK(e.size() == 6);
  CHECK(e.count("What is the entity?"));
  CHECK(e.count("What is that object?"));

  QATemplate a{AnswerType::adjective, "WH ADJ_TYPE is DT OBJ?"};
  auto ea = expand_template(a, std::string("dog"), std::string("color"));
  CHECK(ea.count("What color is this dog?"));
  CHECK(ea.size() == 6);
  CHECK_THROWS_AS(expand_template(a), ValidationError);

  SlotValues empty;
  empty.dt.clear();
  CHECK_THROWS_AS(expand_template(t, std::nullopt, std::nullopt, empty), ValidationError);
}

TEST_CASE("expansion sizes equal substitution-set products") {
  for (const auto& t : builtin_templates()) {
    for (bool obj : {false, true}) {
      if (obj && !t.has_slot("OBJ")) continue;
      CHECK(expansion_size(t, obj) == slot_product(t, obj));
      auto e = expand_template(t, obj ? std::optional<std::string>("dog") : std::nullopt,
                               t.has_slot("ADJ_TYPE") ? std::optional<std::string>("color") : std::nullopt);
      CHECK(e.size() == slot_product(t, obj));
    }
  }
}

TEST_CASE("templates with undeclared slots are rejected") {
  CHECK_THROWS_AS(validate_template({AnswerType::noun, "What is FOO?"}), ValidationError);
  CHECK_NOTHROW(validate_template({AnswerType::noun, "What is DT OBJ?"}));
}

TEST_CASE("template TSV round trip") {
  testutil::TempDir dir("tpl");
  auto p = dir / "t.tsv";
  testutil::write_file(p, serialize_templates(builtin_templates()));
  auto back = load_templates(p);
  REQUIRE(back.size() == builtin_templates().size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].pattern == builtin_templates()[i].pattern);
    CHECK(back[i].answer_type == builtin_templates()[i].answer_type);
  }
  testutil::write_file(p, "noun\tWhat is DT OBJ?\nweird\tWhat?\n");
  CHECK_THROWS_AS(load_templates(p), ValidationError);
}

TEST_CASE("object-specified verb pool only uses templates with OBJ") {
  auto pool = question_pool(builtin_templates(), AnswerType::verb, QuestionVariant::object_specified, "dog", std::nullopt);
  for (const auto& q : pool) CHECK(q.find("dog") != std::string::npos);
  CHECK(pool.count("What is the dog doing?"));
  auto generic = question_pool(builtin_templates(), AnswerType::verb, QuestionVariant::generic, "dog", std::nullopt);
  CHECK(generic.count("What is being done?"));
  CHECK(!generic.count("What is the dog doing?"));
}

TEST_CASE("generate_qas counts and answers") {
  auto dog = make_noun_query(make_concept("dog", PartOfSpeech::noun));
  auto qas = generate_qas(dog, "http://x/1.jpg", 1);
  REQUIRE(qas.size() == 2);
  CHECK(qas[0].answer == "dog");
  CHECK(qas[0].answer_type == AnswerType::noun);
  CHECK(qas[1].answer == "dog");
  CHECK(qas[1].answer_type == AnswerType::entire_query);

  auto bd = generate_qas(brown_dog(), "http://x/2.jpg", 1);
  REQUIRE(bd.size() == 4);
  CHECK(bd[1].answer == "brown");
  CHECK(bd[2].answer == "brown");
  CHECK(bd[2].question.find("dog") != std::string::npos);
  CHECK(bd[3].answer == "brown dog");

  auto dr = generate_qas(dog_running(), "http://x/3.jpg", 1);
  REQUIRE(dr.size() == 4);
  CHECK(dr[1].answer == "running");
  CHECK(dr[1].answer_type == AnswerType::verb);
  CHECK(dr[3].answer == "dog running");

  CHECK(qas_per_image(QueryKind::noun) == 2);
  CHECK(qas_per_image(QueryKind::noun_adjective) == 4);
  CHECK(qas_per_image(QueryKind::noun_verb) == 4);
}

TEST_CASE("brown dog can be asked about its color") {
  bool found = false;
  for (int seed = 0; seed < 400 && !found; ++seed)
    for (const auto& qa : generate_qas(brown_dog(), "img", static_cast<std::uint64_t>(seed)))
      if (qa.question == "What is the color of this dog?" && qa.answer == "brown") found = true;
  CHECK(found);
}

TEST_CASE("generation is deterministic and order independent") {
  auto a = generate_qas(brown_dog(), "img-a", 9);
  generate_qas(dog_running(), "img-b", 9);
  auto b = generate_qas(brown_dog(), "img-a", 9);
  CHECK(a == b);
  for (const auto& qa : a) CHECK(qa_from_json(to_json(qa)) == qa);
  std::set<std::string> ids;
  for (const auto& qa : a) ids.insert(qa.id);
  CHECK(ids.size() == a.size());
}

TEST_CASE("generated questions round-trip to their answer type") {
  std::vector<std::string> objects{"dog"};
  for (int seed = 0; seed < 60; ++seed) {
    for (const auto& q : {brown_dog(), dog_running(), make_noun_query(make_concept("dog", PartOfSpeech::noun))}) {
      for (const auto& qa : generate_qas(q, "img", static_cast<std::uint64_t>(seed))) {
        CHECK(qa.question.find("DT") == std::string::npos);
        CHECK(qa.question.find("OBJ") == std::string::npos);
        auto types = classify_question(qa.question, builtin_templates(), objects, {"color"});
        CHECK(types.count(qa.answer_type));
      }
    }
  }
}

TEST_CASE("task prompts") {
  CHECK(canonical_prompt(PromptTask::classification) == "What is this object?");
  CHECK(canonical_prompt(PromptTask::localization, std::string("dog")) == "Localize dog");
  CHECK(task_prompt(PromptTask::captioning, 4) == task_prompt(PromptTask::captioning, 4));
  auto loc = task_prompt(PromptTask::localization, 11, std::string("dog"));
  CHECK(loc.find("dog") != std::string::npos);
  CHECK_THROWS_AS(task_prompt(PromptTask::localization, 1), ValidationError);
  CHECK_THROWS_AS(parse_prompt_task("segmentation"), ValidationError);
  std::set<std::string> pool(prompt_pool(PromptTask::classification).begin(), prompt_pool(PromptTask::classification).end());
  CHECK(pool.count(task_prompt(PromptTask::classification, 123)));
}
