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
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "conceptkit/jsonl.hpp"
#include "conceptkit/lexicon.hpp"

namespace conceptkit {

struct ImageRecord {
  std::string url;
  std::string query_id;
  std::optional<std::uint64_t> content_hash;
  std::int64_t fetched_at = 0;  // unix seconds, serialized as ISO-8601 UTC
  bool family_friendly = true;

  bool operator==(const ImageRecord&) const = default;
};

json to_json(const ImageRecord& r);
ImageRecord record_from_json(const json& j);

bool is_valid_url(const std::string& url);

std::string format_utc(std::int64_t unix_seconds);
std::int64_t parse_utc(const std::string& iso);

// Records plus, for each query id, the [begin, end) index ranges holding its
// records in rank order.
struct Manifest {
  std::vector<ImageRecord> records;
  std::map<std::string, std::vector<std::pair<std::size_t, std::size_t>>> query_index;

  static Manifest from_records(std::vector<ImageRecord> records);
  std::vector<const ImageRecord*> records_for(const std::string& query_id) const;
  bool operator==(const Manifest& o) const { return records == o.records; }
};

// Drops exact-URL repeats within a query, keeping the first. The same URL
// under different queries is kept.
Manifest dedup_manifest(std::vector<ImageRecord> records);

// Throws ValidationError if a record is unsafe or malformed, a (query, url)
// pair repeats, or a query id is not in `known_queries`.
void validate_manifest(const Manifest& m, const std::set<std::string>& known_queries);

void write_manifest(const std::filesystem::path& path, const Manifest& m,
                    const std::optional<ArtifactHeader>& header = std::nullopt);
Manifest read_manifest(const std::filesystem::path& path);

// Appends records line by line, flushing after each batch so a crash leaves
// whole lines only.
class ManifestAppender {
 public:
  explicit ManifestAppender(const std::filesystem::path& path,
                            const std::optional<ArtifactHeader>& header = std::nullopt);
  void append(const std::vector<ImageRecord>& records);

 private:
  std::filesystem::path path_;
  std::mutex mu_;
};

class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now() = 0;  // monotonic seconds
  virtual void sleep_for(double seconds) = 0;
  virtual std::int64_t wall_time() = 0;  // unix seconds
};

class SystemClock : public Clock {
 public:
  double now() override;
  void sleep_for(double seconds) override;
  std::int64_t wall_time() override;
};

// Time only moves when someone sleeps.
class FakeClock : public Clock {
 public:
  explicit FakeClock(std::int64_t wall_start = 0) : wall_start_(wall_start) {}
  double now() override;
  void sleep_for(double seconds) override;
  std::int64_t wall_time() override;
  std::vector<double> sleeps() const;

 private:
  mutable std::mutex mu_;
  double t_ = 0.0;
  std::int64_t wall_start_;
  std::vector<double> sleeps_;
};

// Wall time pinned to a constant; used to make fetch output reproducible.
class FixedWallClock : public SystemClock {
 public:
  explicit FixedWallClock(std::int64_t wall) : wall_(wall) {}
  std::int64_t wall_time() override { return wall_; }

 private:
  std::int64_t wall_;
};

// Token bucket. acquire() reserves a token and sleeps until it is due, so the
// k-th call (0-based) never returns before (k - burst + 1) / rate seconds.
class RateLimiter {
 public:
  RateLimiter(double rate_per_second, double burst, Clock& clock);
  void acquire();

 private:
  double rate_;
  double burst_;
  Clock& clock_;
  std::mutex mu_;
  double tokens_;
  double last_;
};

struct SearchHit {
  std::string url;
  std::string title;
  bool family_friendly = true;
};

struct SearchResponse {
  int status = 200;  // 0 for transport errors
  std::vector<SearchHit> hits;
  std::optional<double> retry_after;
  std::string error;
};

// Accepts either the Bing image search shape {"value":[{"contentUrl","name",
// "isFamilyFriendly"}]} or {"results":[{"url","metadata":{"title",
// "isFamilyFriendly"}}]}. Missing family-friendly flags count as unsafe.
std::vector<SearchHit> parse_search_page(const json& page);

class SearchClient {
 public:
  virtual ~SearchClient() = default;
  virtual SearchResponse search(const std::string& query, int count) = 0;
};

// Replays a recorded JSON object mapping query text to a response page.
// Queries absent from the recording return an empty page.
class FixtureSearchClient : public SearchClient {
 public:
  explicit FixtureSearchClient(const std::filesystem::path& path);
  explicit FixtureSearchClient(json recording);
  SearchResponse search(const std::string& query, int count) override;
  std::size_t calls() const;

 private:
  json recording_;
  mutable std::mutex mu_;
  std::size_t calls_ = 0;
};

// GET <endpoint>?q=<query>&count=<n>&safeSearch=Strict with the key in the
// Ocp-Apim-Subscription-Key header.
class HttpSearchClient : public SearchClient {
 public:
  HttpSearchClient(std::string endpoint, std::string api_key, double timeout_seconds = 30.0);
  SearchResponse search(const std::string& query, int count) override;

 private:
  std::string endpoint_;
  std::string api_key_;
  double timeout_;
};

// Builds a client from an endpoint spec: "fixture:<path>" replays a
// recording, anything else is an HTTP(S) URL.
std::unique_ptr<SearchClient> make_search_client(const std::string& endpoint, const std::string& api_key);

struct RetryPolicy {
  int attempts = 3;
  double initial_backoff = 1.0;
  double backoff_multiplier = 2.0;
  int max_quota_pauses = 5;
  double quota_pause = 60.0;  // used when the server sends no Retry-After
};

struct FetchOptions {
  int limit = 25;
  std::set<std::string> blacklist;
  RetryPolicy retry;
};

struct FetchResult {
  std::string query_id;
  std::vector<ImageRecord> records;
  bool failed = false;
  int attempts = 0;
  std::string error;
};

// Blacklist check over the title and URL words of a hit.
bool hit_mentions_blacklisted(const SearchHit& hit, const std::set<std::string>& blacklist);

// At most `limit` records in result rank order, dropping hits that are not
// family friendly, have malformed URLs, mention blacklisted terms, or repeat
// a URL. Transport and server errors are retried with exponential backoff;
// HTTP 429 pauses without consuming an attempt. Never throws for remote
// failures: the result is marked failed instead.
FetchResult fetch_query(const PairQuery& query, const FetchOptions& options, SearchClient& client,
                        Clock& clock, RateLimiter* limiter = nullptr);

struct FetchSummary {
  std::size_t queries_fetched = 0;
  std::size_t queries_skipped = 0;
  std::size_t queries_failed = 0;
  std::size_t records = 0;
  std::vector<std::string> failed_ids;
};

// Fetches every query that has no records in `existing`, `workers` at a time.
// Results are handed to `sink` in query order, one query at a time.
FetchSummary fetch_all(const std::vector<PairQuery>& queries, const Manifest& existing,
                       const FetchOptions& options, SearchClient& client, Clock& clock,
                       RateLimiter* limiter, unsigned workers,
                       const std::function<void(const FetchResult&)>& sink);

// Downloads image bytes into `dir/<hash>.img` and fills content_hash.
// Returns the number of failed downloads.
using ImageGetter = std::function<std::optional<std::string>(const std::string& url)>;
std::size_t download_images(Manifest& m, const std::filesystem::path& dir, const ImageGetter& get);
ImageGetter http_image_getter(double timeout_seconds = 30.0);

}  // namespace conceptkit
