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
#include "conceptkit/jsonl.hpp"
#include "conceptkit/random.hpp"
#include "conceptkit/text.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace conceptkit;

TEST_CASE("normalize_answer lowercases, strips articles and punctuation") {
  CHECK(normalize_answer("The Dog!") == "dog");
  CHECK(normalize_answer("  a   red   car ") == "red car");
  CHECK(normalize_answer("an apple, please") == "apple please");
  CHECK(normalize_answer("dog's") == "dogs");
  CHECK(normalize_answer("theater") == "theater");
  for (const char* s : {"The Dog!", "a-b c", "  An  Old Car.  ", "x"})
    CHECK(normalize_answer(normalize_answer(s)) == normalize_answer(s));
}

TEST_CASE("answer_word_count ignores articles") {
  CHECK(answer_word_count("the red car") == 2);
  CHECK(answer_word_count("a") == 0);
  CHECK(answer_word_count("fire truck on the road") == 4);
}

TEST_CASE("tokenize and split") {
  CHECK(tokenize("  a \t b\nc ") == std::vector<std::string>{"a", "b", "c"});
  CHECK(tokenize("").empty());
  CHECK(split("a\tb\t", '\t') == std::vector<std::string>{"a", "b", ""});
}

TEST_CASE("fnv1a64 matches published vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("keyed_hash separates key boundaries") {
  CHECK(keyed_hash(1, {"ab", "c"}) != keyed_hash(1, {"a", "bc"}));
  CHECK(keyed_hash(1, {"x"}) != keyed_hash(2, {"x"}));
  CHECK(keyed_hash(7, {"x", "y"}) == keyed_hash(7, {"x", "y"}));
}

TEST_CASE("Rng::below stays in range and covers it") {
  Rng rng(42);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 7000; ++i) {
    auto v = rng.below(7);
    REQUIRE(v < 7);
    ++hist[v];
  }
  for (int h : hist) CHECK(h > 800);
}

TEST_CASE("sample_indices draws distinct indices") {
  Rng rng(3);
  auto s = sample_indices(10, 4, rng);
  CHECK(s.size() == 4);
  CHECK(std::set<std::size_t>(s.begin(), s.end()).size() == 4);
  for (auto i : s) CHECK(i < 10);
  Rng rng2(3);
  CHECK(sample_indices(3, 10, rng2).size() == 3);
}

TEST_CASE("shuffle is a permutation and reproducible") {
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  auto a = v, b = v;
  Rng r1(9), r2(9);
  shuffle(a, r1);
  shuffle(b, r2);
  CHECK(a == b);
  CHECK(a != v);
  std::sort(a.begin(), a.end());
  CHECK(a == v);
}

TEST_CASE("jsonl round trip skips the header and reports bad lines") {
  testutil::TempDir dir("jsonl");
  auto p = dir / "x.jsonl";
  write_jsonl(p, {json{{"b", 1}, {"a", 2}}, json{{"c", "x"}}}, ArtifactHeader{"cmd", "abc", 5});
  auto text = testutil::read_file(p);
  CHECK(text == "{\"_header\":{\"command\":\"cmd\",\"config_hash\":\"abc\",\"seed\":5}}\n{\"a\":2,\"b\":1}\n{\"c\":\"x\"}\n");
  auto recs = read_jsonl(p);
  REQUIRE(recs.size() == 2);
  CHECK(recs[1]["c"] == "x");

  testutil::write_file(p, "{\"a\":1}\n\n{\"a\":\n");
  try {
    read_jsonl(p);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("line files carry a comment header") {
  testutil::TempDir dir("lines");
  auto p = dir / "x.txt";
  write_lines(p, {"a", "b"}, ArtifactHeader{"split", "ff", 2});
  CHECK(testutil::read_file(p) == "# command=split config_hash=ff seed=2\na\nb\n");
  CHECK(read_lines(p) == std::vector<std::string>{"a", "b"});
}
