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

#include <atomic>
#include <deque>
#include <set>
#include <thread>

#include "conceptkit/error.hpp"
#include "conceptkit/random.hpp"
#include "conceptkit/search_ingest.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace conceptkit;

namespace {

PairQuery noun_query(const std::string& n) { return make_noun_query(make_concept(n, PartOfSpeech::noun)); }

json page_of(int n, const std::string& prefix = "https://img.example.com/") {
  json value = json::array();
  for (int i = 0; i < n; ++i)
    value.push_back({{"contentUrl", prefix + std::to_string(i) + ".jpg"}, {"name", "photo " + std::to_string(i)},
                     {"isFamilyFriendly", true}});
  return json{{"value", value}};
}

// Replays a fixed list of responses, then repeats the last one.
class ScriptedClient : public SearchClient {
 public:
  explicit ScriptedClient(std::vector<SearchResponse> script) : script_(std::move(script)) {}
  SearchResponse search(const std::string&, int) override {
    std::lock_guard lock(mu_);
    auto r = script_[std::min(calls_, script_.size() - 1)];
    ++calls_;
    return r;
  }
  std::size_t calls() const { return calls_; }

 private:
  std::vector<SearchResponse> script_;
  std::size_t calls_ = 0;
  std::mutex mu_;
};

SearchResponse ok(int n) { return SearchResponse{200, parse_search_page(page_of(n)), std::nullopt, ""}; }
SearchResponse status(int code, std::optional<double> retry_after = std::nullopt) {
  return SearchResponse{code, {}, retry_after, "boom"};
}

ImageRecord rec(const std::string& q, const std::string& url) {
  return ImageRecord{url, q, std::nullopt, 1700000000, true};
}

}  // namespace

TEST_CASE("parse_search_page accepts both page shapes") {
  auto hits = parse_search_page(page_of(3));
  REQUIRE(hits.size() == 3);
  CHECK(hits[1].url == "https://img.example.com/1.jpg");
  auto alt = parse_search_page(json::parse(R"({"results":[{"url":"http://a/b.png","metadata":{"title":"t","isFamilyFriendly":false}},
                                                          {"url":"http://a/c.png","metadata":{"title":"u"}}]})"));
  REQUIRE(alt.size() == 2);
  CHECK(!alt[0].family_friendly);
  CHECK(!alt[1].family_friendly);
  CHECK_THROWS_AS(parse_search_page(json::array()), ValidationError);
}

TEST_CASE("fetch_query truncates to the limit and under-fills quietly") {
  FakeClock clock;
  FetchOptions opts;
  ScriptedClient thirty({ok(30)});
  auto r = fetch_query(noun_query("dog"), opts, thirty, clock);
  CHECK(r.records.size() == 25);
  CHECK(!r.failed);
  CHECK(r.records[0].url == "https://img.example.com/0.jpg");
  CHECK(r.records[24].url == "https://img.example.com/24.jpg");

  ScriptedClient ten({ok(10)});
  r = fetch_query(noun_query("dog"), opts, ten, clock);
  CHECK(r.records.size() == 10);
  CHECK(!r.failed);
  opts.limit = 0;
  CHECK_THROWS_AS(fetch_query(noun_query("dog"), opts, ten, clock), ValidationError);
}

TEST_CASE("fetch_query filters unsafe, blacklisted, malformed and repeated hits") {
  auto page = json::parse(R"({"value":[
    {"contentUrl":"https://a/1.jpg","name":"nice dog","isFamilyFriendly":true},
    {"contentUrl":"https://a/2.jpg","name":"dog","isFamilyFriendly":false},
    {"contentUrl":"https://a/3.jpg","name":"dog with a gun","isFamilyFriendly":true},
    {"contentUrl":"not a url","name":"dog","isFamilyFriendly":true},
    {"contentUrl":"https://a/1.jpg","name":"nice dog again","isFamilyFriendly":true},
    {"contentUrl":"https://a/gun/4.jpg","name":"dog","isFamilyFriendly":true},
    {"contentUrl":"https://a/5.jpg","name":"good dog","isFamilyFriendly":true}]})");
  FixtureSearchClient client(json{{"dog", page}});
  FakeClock clock(1700000000);
  FetchOptions opts;
  opts.blacklist = {"gun"};
  auto r = fetch_query(noun_query("dog"), opts, client, clock);
  REQUIRE(r.records.size() == 2);
  CHECK(r.records[0].url == "https://a/1.jpg");
  CHECK(r.records[1].url == "https://a/5.jpg");
  for (const auto& x : r.records) {
    CHECK(x.family_friendly);
    CHECK(x.fetched_at == 1700000000);
  }
}

TEST_CASE("retries back off exponentially and failures are not fatal") {
  FakeClock clock;
  FetchOptions opts;
  ScriptedClient flaky({status(500), status(0), ok(3)});
  auto r = fetch_query(noun_query("dog"), opts, flaky, clock);
  CHECK(!r.failed);
  CHECK(r.attempts == 3);
  CHECK(r.records.size() == 3);
  CHECK(clock.sleeps() == std::vector<double>{1.0, 2.0});

  FakeClock clock2;
  ScriptedClient dead({status(503)});
  r = fetch_query(noun_query("dog"), opts, dead, clock2);
  CHECK(r.failed);
  CHECK(r.attempts == 3);
  CHECK(r.records.empty());
  CHECK(dead.calls() == 3);
  CHECK(clock2.sleeps() == std::vector<double>{1.0, 2.0});
}

TEST_CASE("quota responses pause without using attempts") {
  FakeClock clock;
  FetchOptions opts;
  ScriptedClient quota({status(429, 7.0), status(429), status(500), ok(2)});
  auto r = fetch_query(noun_query("dog"), opts, quota, clock);
  CHECK(!r.failed);
  CHECK(r.attempts == 2);
  CHECK(clock.sleeps() == std::vector<double>{7.0, 60.0, 1.0});

  FakeClock clock2;
  opts.retry.max_quota_pauses = 2;
  ScriptedClient always({status(429)});
  r = fetch_query(noun_query("dog"), opts, always, clock2);
  CHECK(r.failed);
}

TEST_CASE("rate limiter never exceeds its ceiling") {
  for (double burst : {1.0, 3.0}) {
    FakeClock clock;
    const double rate = 4.0;
    RateLimiter limiter(rate, burst, clock);
    std::vector<double> times;
    for (int k = 0; k < 40; ++k) {
      limiter.acquire();
      times.push_back(clock.now());
      CHECK(clock.now() >= (k - burst + 1) / rate - 1e-12);
    }
    for (std::size_t i = 0; i < times.size(); ++i)
      for (std::size_t j = i; j < times.size(); ++j) {
        double window = times[j] - times[i];
        CHECK(static_cast<double>(j - i + 1) <= burst + rate * window + 1e-9);
      }
    CHECK(times.back() == doctest::Approx((40 - burst) / rate));
  }
  FakeClock clock;
  CHECK_THROWS_AS(RateLimiter(0.0, 1.0, clock), ValidationError);
}

TEST_CASE("rate limiter holds under concurrent callers") {
  FakeClock clock;
  RateLimiter limiter(10.0, 1.0, clock);
  std::vector<std::thread> pool;
  for (int t = 0; t < 4; ++t)
    pool.emplace_back([&] {
      for (int i = 0; i < 10; ++i) limiter.acquire();
    });
  for (auto& t : pool) t.join();
  CHECK(clock.now() >= 3.9 - 1e-9);
}

TEST_CASE("dedup_manifest keeps cross-query duplicates") {
  auto m = dedup_manifest({rec("q1", "http://u/1"), rec("q1", "http://u/1")});
  CHECK(m.records.size() == 1);
  m = dedup_manifest({rec("q1", "http://u/1"), rec("q2", "http://u/1")});
  CHECK(m.records.size() == 2);
}

TEST_CASE("dedup_manifest matches a hash-set recount") {
  Rng rng(2024);
  std::vector<ImageRecord> records;
  for (int i = 0; i < 1000; ++i) {
    std::string q = "q" + std::to_string(rng.below(20));
    std::string u = "http://u/" + std::to_string(rng.below(10) == 0 ? 0 : i);
    records.push_back(rec(q, u));
  }
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& r : records) seen.insert({r.query_id, r.url});
  auto m = dedup_manifest(records);
  CHECK(m.records.size() == seen.size());
  for (const auto& [q, ranges] : m.query_index)
    for (auto [b, e] : ranges)
      for (auto i = b; i < e; ++i) CHECK(m.records[i].query_id == q);
}

TEST_CASE("validate_manifest enforces invariants") {
  auto good = Manifest::from_records({rec("q1", "http://u/1")});
  CHECK_NOTHROW(validate_manifest(good, {"q1"}));
  CHECK_THROWS_AS(validate_manifest(good, {"q2"}), ValidationError);
  auto unsafe = rec("q1", "http://u/1");
  unsafe.family_friendly = false;
  CHECK_THROWS_AS(validate_manifest(Manifest::from_records({unsafe}), {"q1"}), ValidationError);
  CHECK_THROWS_AS(validate_manifest(Manifest::from_records({rec("q1", "http://u/1"), rec("q1", "http://u/1")}), {"q1"}),
                  ValidationError);
}

TEST_CASE("manifest round trip is lossless") {
  testutil::TempDir dir("manifest");
  auto p = dir / "m.jsonl";
  write_manifest(p, Manifest{});
  CHECK(read_manifest(p).records.empty());

  auto r3 = rec("q2", "https://u/3");
  r3.content_hash = 0xdeadbeefcafef00dULL;
  auto m = Manifest::from_records({rec("q1", "http://u/1"), rec("q1", "http://u/2"), r3});
  write_manifest(p, m);
  auto bytes = testutil::read_file(p);
  auto back = read_manifest(p);
  CHECK(back == m);
  write_manifest(dir / "m2.jsonl", back);
  CHECK(testutil::read_file(dir / "m2.jsonl") == bytes);

  testutil::write_file(p, bytes.substr(0, bytes.size() - 10));
  try {
    read_manifest(p);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("timestamps and URLs") {
  CHECK(format_utc(0) == "1970-01-01T00:00:00Z");
  CHECK(parse_utc("2026-01-01T00:00:00Z") == 1767225600);
  CHECK(parse_utc(format_utc(1700000123)) == 1700000123);
  CHECK_THROWS_AS(parse_utc("yesterday"), ValidationError);
  CHECK(is_valid_url("https://a.b/c.jpg?x=1"));
  CHECK(!is_valid_url("ftp://a/b"));
  CHECK(!is_valid_url("http:/broken"));
}

TEST_CASE("fetch_all resumes and delivers results in query order") {
  std::vector<PairQuery> qs{noun_query("cat"), noun_query("dog"), noun_query("owl"), noun_query("pig")};
  json recording;
  for (const auto& q : qs) recording[q.query_text] = page_of(3, "https://img/" + q.query_text + "/");
  FixtureSearchClient client(recording);
  FakeClock clock;
  Manifest existing = Manifest::from_records({rec("n:dog", "https://img/dog/0.jpg")});
  std::vector<std::string> order;
  auto s = fetch_all(qs, existing, FetchOptions{}, client, clock, nullptr, 3,
                     [&](const FetchResult& r) { order.push_back(r.query_id); });
  CHECK(order == std::vector<std::string>{"n:cat", "n:owl", "n:pig"});
  CHECK(s.queries_skipped == 1);
  CHECK(s.queries_fetched == 3);
  CHECK(s.records == 9);
  CHECK(client.calls() == 3);
}

TEST_CASE("appender output can be resumed") {
  testutil::TempDir dir("append");
  auto p = dir / "m.jsonl";
  {
    ManifestAppender a(p, ArtifactHeader{"fetch", "h", 0});
    a.append({rec("q1", "http://u/1")});
  }
  {
    ManifestAppender a(p, ArtifactHeader{"fetch", "h", 0});
    a.append({rec("q2", "http://u/2")});
  }
  auto text = testutil::read_file(p);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  CHECK(read_manifest(p).records.size() == 2);
}

TEST_CASE("fixture client errors and downloads") {
  FixtureSearchClient client(json{{"dog", {{"status", 503}}}});
  CHECK(client.search("dog", 5).status == 503);
  CHECK(client.search("cat", 5).hits.empty());

  testutil::TempDir dir("dl");
  auto m = Manifest::from_records({rec("q", "http://u/1"), rec("q", "http://u/2")});
  auto failures = download_images(m, dir.path(), [](const std::string& url) -> std::optional<std::string> {
    if (url.back() == '2') return std::nullopt;
    return std::string("bytes");
  });
  CHECK(failures == 1);
  REQUIRE(m.records[0].content_hash);
  CHECK(*m.records[0].content_hash == fnv1a64("bytes"));
  CHECK(std::filesystem::exists(dir / (hex64(fnv1a64("bytes")) + ".img")));
  CHECK_THROWS_AS(make_search_client("https://api.example.com/search", ""), ValidationError);
}
