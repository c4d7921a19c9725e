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

#include "conceptkit/search_ingest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <regex>
#include <thread>
#include <unordered_set>

#include "conceptkit/error.hpp"
#include "conceptkit/random.hpp"
#include "conceptkit/text.hpp"

namespace conceptkit {

std::string format_utc(std::int64_t unix_seconds) {
  std::time_t t = static_cast<std::time_t>(unix_seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::int64_t parse_utc(const std::string& iso) {
  std::tm tm{};
  int y, mo, d, h, mi, s;
  char z = 0;
  if (std::sscanf(iso.c_str(), "%d-%d-%dT%d:%d:%d%c", &y, &mo, &d, &h, &mi, &s, &z) != 7 || z != 'Z')
    throw ValidationError("bad timestamp '" + iso + "'");
  tm.tm_year = y - 1900;
  tm.tm_mon = mo - 1;
  tm.tm_mday = d;
  tm.tm_hour = h;
  tm.tm_min = mi;
  tm.tm_sec = s;
  return static_cast<std::int64_t>(timegm(&tm));
}

bool is_valid_url(const std::string& url) {
  static const std::regex re(R"(^https?://[A-Za-z0-9.\-]+(:[0-9]+)?([/?#][^\s]*)?$)");
  return std::regex_match(url, re);
}

json to_json(const ImageRecord& r) {
  return json{{"url", r.url},
              {"query_id", r.query_id},
              {"content_hash", r.content_hash ? json(hex64(*r.content_hash)) : json(nullptr)},
              {"fetched_at", format_utc(r.fetched_at)},
              {"family_friendly", r.family_friendly}};
}

ImageRecord record_from_json(const json& j) {
  ImageRecord r;
  r.url = j.at("url").get<std::string>();
  r.query_id = j.at("query_id").get<std::string>();
  const auto& h = j.at("content_hash");
  if (!h.is_null()) {
    auto s = h.get<std::string>();
    if (s.size() != 16 || s.find_first_not_of("0123456789abcdef") != std::string::npos)
      throw ValidationError("bad content_hash '" + s + "'");
    r.content_hash = std::stoull(s, nullptr, 16);
  }
  r.fetched_at = parse_utc(j.at("fetched_at").get<std::string>());
  r.family_friendly = j.at("family_friendly").get<bool>();
  if (!is_valid_url(r.url)) throw ValidationError("invalid url '" + r.url + "'");
  return r;
}

Manifest Manifest::from_records(std::vector<ImageRecord> records) {
  Manifest m;
  m.records = std::move(records);
  for (std::size_t i = 0; i < m.records.size(); ++i) {
    auto& ranges = m.query_index[m.records[i].query_id];
    if (!ranges.empty() && ranges.back().second == i) {
      ranges.back().second = i + 1;
    } else {
      ranges.emplace_back(i, i + 1);
    }
  }
  return m;
}

std::vector<const ImageRecord*> Manifest::records_for(const std::string& query_id) const {
  std::vector<const ImageRecord*> out;
  auto it = query_index.find(query_id);
  if (it == query_index.end()) return out;
  for (auto [b, e] : it->second)
    for (auto i = b; i < e; ++i) out.push_back(&records[i]);
  return out;
}

Manifest dedup_manifest(std::vector<ImageRecord> records) {
  std::set<std::pair<std::string, std::string>> seen;
  std::vector<ImageRecord> kept;
  kept.reserve(records.size());
  for (auto& r : records) {
    if (seen.emplace(r.query_id, r.url).second) kept.push_back(std::move(r));
  }
  return Manifest::from_records(std::move(kept));
}

void validate_manifest(const Manifest& m, const std::set<std::string>& known_queries) {
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& r : m.records) {
    if (!r.family_friendly) throw ValidationError("record '" + r.url + "' is not family friendly");
    if (!is_valid_url(r.url)) throw ValidationError("invalid url '" + r.url + "'");
    if (!seen.emplace(r.query_id, r.url).second)
      throw ValidationError("duplicate record (" + r.query_id + ", " + r.url + ")");
    if (!known_queries.count(r.query_id))
      throw ValidationError("record references unknown query '" + r.query_id + "'");
  }
}

void write_manifest(const std::filesystem::path& path, const Manifest& m,
                    const std::optional<ArtifactHeader>& header) {
  std::vector<json> lines;
  lines.reserve(m.records.size());
  for (const auto& r : m.records) lines.push_back(to_json(r));
  write_jsonl(path, lines, header);
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::vector<ImageRecord> records;
  for_each_jsonl(path, [&](const json& j, std::size_t line) {
    try {
      records.push_back(record_from_json(j));
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(path.string(), line, e.what());
    }
  });
  return Manifest::from_records(std::move(records));
}

ManifestAppender::ManifestAppender(const std::filesystem::path& path,
                                   const std::optional<ArtifactHeader>& header)
    : path_(path) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  bool fresh = !std::filesystem::exists(path_) || std::filesystem::file_size(path_) == 0;
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw RuntimeFailure("cannot open manifest '" + path_.string() + "'");
  if (fresh && header) out << dump_line(json{{kHeaderKey, header->to_json()}}) << '\n';
}

void ManifestAppender::append(const std::vector<ImageRecord>& records) {
  std::lock_guard lock(mu_);
  std::string buf;
  for (const auto& r : records) buf += dump_line(to_json(r)) + '\n';
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  out << buf;
  out.flush();
  if (!out) throw RuntimeFailure("append failed for '" + path_.string() + "'");
}

double SystemClock::now() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

void SystemClock::sleep_for(double seconds) {
  if (seconds > 0) std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

std::int64_t SystemClock::wall_time() {
  using namespace std::chrono;
  return duration_cast<seconds>(system_clock::now().time_since_epoch()).count();
}

double FakeClock::now() {
  std::lock_guard lock(mu_);
  return t_;
}

void FakeClock::sleep_for(double seconds) {
  std::lock_guard lock(mu_);
  sleeps_.push_back(seconds);
  if (seconds > 0) t_ += seconds;
}

std::int64_t FakeClock::wall_time() {
  std::lock_guard lock(mu_);
  return wall_start_ + static_cast<std::int64_t>(std::floor(t_));
}

std::vector<double> FakeClock::sleeps() const {
  std::lock_guard lock(mu_);
  return sleeps_;
}

RateLimiter::RateLimiter(double rate_per_second, double burst, Clock& clock)
    : rate_(rate_per_second), burst_(std::max(1.0, burst)), clock_(clock), tokens_(burst_),
      last_(clock.now()) {
  if (!(rate_ > 0)) throw ValidationError("rate must be positive");
}

void RateLimiter::acquire() {
  double wait = 0;
  {
    std::lock_guard lock(mu_);
    double t = clock_.now();
    tokens_ = std::min(burst_, tokens_ + (t - last_) * rate_);
    last_ = t;
    tokens_ -= 1.0;
    if (tokens_ < 0) wait = -tokens_ / rate_;
  }
  clock_.sleep_for(wait);
}

std::vector<SearchHit> parse_search_page(const json& page) {
  std::vector<SearchHit> hits;
  if (!page.is_object()) throw ValidationError("search page is not a JSON object");
  if (page.contains("value")) {
    for (const auto& v : page["value"]) {
      SearchHit h;
      h.url = v.value("contentUrl", "");
      h.title = v.value("name", "");
      h.family_friendly = v.value("isFamilyFriendly", false);
      hits.push_back(std::move(h));
    }
  } else if (page.contains("results")) {
    for (const auto& v : page["results"]) {
      SearchHit h;
      h.url = v.value("url", "");
      const json meta = v.value("metadata", json::object());
      h.title = meta.value("title", "");
      h.family_friendly = meta.value("isFamilyFriendly", false);
      hits.push_back(std::move(h));
    }
  }
  return hits;
}

FixtureSearchClient::FixtureSearchClient(const std::filesystem::path& path)
    : FixtureSearchClient(read_json(path)) {}

FixtureSearchClient::FixtureSearchClient(json recording) : recording_(std::move(recording)) {
  if (!recording_.is_object()) throw ValidationError("search recording must be a JSON object");
}

SearchResponse FixtureSearchClient::search(const std::string& query, int /*count*/) {
  {
    std::lock_guard lock(mu_);
    ++calls_;
  }
  SearchResponse r;
  auto it = recording_.find(query);
  if (it == recording_.end()) return r;
  if (it->contains("status")) r.status = (*it)["status"].get<int>();
  if (r.status == 200) r.hits = parse_search_page(*it);
  return r;
}

std::size_t FixtureSearchClient::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::unique_ptr<SearchClient> make_search_client(const std::string& endpoint, const std::string& api_key) {
  if (starts_with(endpoint, "fixture:"))
    return std::make_unique<FixtureSearchClient>(std::filesystem::path(endpoint.substr(8)));
  if (api_key.empty()) throw ValidationError("no API key configured for endpoint " + endpoint);
  return std::make_unique<HttpSearchClient>(endpoint, api_key);
}

bool hit_mentions_blacklisted(const SearchHit& hit, const std::set<std::string>& blacklist) {
  if (blacklist.empty()) return false;
  std::string text = to_lower(hit.title + " " + hit.url);
  for (char& c : text)
    if (!std::isalnum(static_cast<unsigned char>(c))) c = ' ';
  for (const auto& tok : tokenize(text))
    if (blacklist.count(tok)) return true;
  return false;
}

FetchResult fetch_query(const PairQuery& query, const FetchOptions& options, SearchClient& client,
                        Clock& clock, RateLimiter* limiter) {
  if (options.limit <= 0) throw ValidationError("fetch limit must be positive");
  FetchResult result;
  result.query_id = query.id();

  SearchResponse resp;
  double backoff = options.retry.initial_backoff;
  int quota_pauses = 0;
  while (true) {
    if (limiter) limiter->acquire();
    ++result.attempts;
    try {
      resp = client.search(query.query_text, options.limit);
    } catch (const std::exception& e) {
      resp = SearchResponse{0, {}, std::nullopt, e.what()};
    }
    if (resp.status == 200) break;
    if (resp.status == 429 && quota_pauses < options.retry.max_quota_pauses) {
      ++quota_pauses;
      --result.attempts;
      clock.sleep_for(resp.retry_after.value_or(options.retry.quota_pause));
      continue;
    }
    if (result.attempts >= options.retry.attempts) {
      result.failed = true;
      result.error = "status " + std::to_string(resp.status) + (resp.error.empty() ? "" : ": " + resp.error);
      return result;
    }
    clock.sleep_for(backoff);
    backoff *= options.retry.backoff_multiplier;
  }

  const auto now = clock.wall_time();
  std::unordered_set<std::string> seen;
  for (const auto& h : resp.hits) {
    if (static_cast<int>(result.records.size()) >= options.limit) break;
    if (!h.family_friendly || !is_valid_url(h.url)) continue;
    if (hit_mentions_blacklisted(h, options.blacklist)) continue;
    if (!seen.insert(h.url).second) continue;
    result.records.push_back(ImageRecord{h.url, result.query_id, std::nullopt, now, true});
  }
  return result;
}

FetchSummary fetch_all(const std::vector<PairQuery>& queries, const Manifest& existing,
                       const FetchOptions& options, SearchClient& client, Clock& clock,
                       RateLimiter* limiter, unsigned workers,
                       const std::function<void(const FetchResult&)>& sink) {
  workers = std::max(1u, workers);
  FetchSummary summary;
  std::vector<const PairQuery*> todo;
  for (const auto& q : queries) {
    if (existing.query_index.count(q.id())) {
      ++summary.queries_skipped;
    } else {
      todo.push_back(&q);
    }
  }
  for (std::size_t b = 0; b < todo.size(); b += workers) {
    std::size_t e = std::min(todo.size(), b + workers);
    std::vector<FetchResult> results(e - b);
    std::vector<std::thread> pool;
    for (std::size_t i = b; i < e; ++i) {
      pool.emplace_back([&, i] { results[i - b] = fetch_query(*todo[i], options, client, clock, limiter); });
    }
    for (auto& t : pool) t.join();
    for (auto& r : results) {
      ++summary.queries_fetched;
      if (r.failed) {
        ++summary.queries_failed;
        summary.failed_ids.push_back(r.query_id);
      }
      summary.records += r.records.size();
      sink(r);
    }
  }
  return summary;
}

std::size_t download_images(Manifest& m, const std::filesystem::path& dir, const ImageGetter& get) {
  std::filesystem::create_directories(dir);
  std::size_t failures = 0;
  for (auto& r : m.records) {
    if (r.content_hash) continue;
    auto bytes = get(r.url);
    if (!bytes) {
      ++failures;
      continue;
    }
    auto h = fnv1a64(*bytes);
    auto file = dir / (hex64(h) + ".img");
    if (!std::filesystem::exists(file)) {
      std::ofstream out(file, std::ios::binary);
      out << *bytes;
      if (!out) throw RuntimeFailure("cannot write '" + file.string() + "'");
    }
    r.content_hash = h;
  }
  return failures;
}

}  // namespace conceptkit
