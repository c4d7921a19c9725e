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

#include "conceptkit/splits.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "conceptkit/error.hpp"
#include "conceptkit/random.hpp"

namespace conceptkit {

std::string pair_id(const std::string& query_id, const std::string& url) {
  return query_id + "#" + hex64(fnv1a64(url));
}

std::string pair_id(const ImageRecord& r) { return pair_id(r.query_id, r.url); }

Splits split_pairs(const Manifest& manifest, const SplitSpec& spec) {
  struct Ranked {
    std::uint64_t key;
    std::string id;
  };
  std::map<std::string, std::uint64_t> unique;
  for (const auto& r : manifest.records)
    unique.emplace(pair_id(r), keyed_hash(spec.seed, {r.query_id, r.url}));

  const std::size_t want = spec.train_n + spec.val_n + spec.test_n;
  if (want > unique.size())
    throw ValidationError("split sizes " + std::to_string(spec.train_n) + "/" + std::to_string(spec.val_n) +
                          "/" + std::to_string(spec.test_n) + " exceed the " +
                          std::to_string(unique.size()) + " available pairs");

  std::vector<Ranked> ranked;
  ranked.reserve(unique.size());
  for (auto& [id, key] : unique) ranked.push_back({key, id});
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    return a.key != b.key ? a.key < b.key : a.id < b.id;
  });

  Splits out;
  std::size_t i = 0;
  auto take = [&](std::vector<std::string>& dst, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) dst.push_back(ranked[i++].id);
    std::sort(dst.begin(), dst.end());
  };
  take(out.train, spec.train_n);
  take(out.val, spec.val_n);
  take(out.test, spec.test_n);
  return out;
}

void VerificationVote::validate() const {
  if (worker_votes.size() != 3)
    throw ValidationError("pair '" + pair_id + "' has " + std::to_string(worker_votes.size()) +
                          " votes, expected 3");
}

VerificationVote vote_from_json(const json& j) {
  VerificationVote v{j.at("pair_id").get<std::string>(), j.at("votes").get<std::vector<bool>>()};
  v.validate();
  return v;
}

VerificationRule parse_verification_rule(const std::string& s) {
  if (s == "unanimous") return VerificationRule::unanimous;
  if (s == "majority") return VerificationRule::majority;
  throw ValidationError("unknown verification rule '" + s + "'");
}

VerificationResult apply_verification(const std::vector<std::string>& pairs,
                                      const std::vector<VerificationVote>& votes,
                                      VerificationRule rule) {
  std::set<std::string> known(pairs.begin(), pairs.end());
  std::set<std::string> voted;
  VerificationResult out;
  for (const auto& v : votes) {
    v.validate();
    if (!known.count(v.pair_id)) throw ValidationError("vote for unknown pair '" + v.pair_id + "'");
    if (!voted.insert(v.pair_id).second) throw ValidationError("pair '" + v.pair_id + "' voted twice");
    auto yes = std::count(v.worker_votes.begin(), v.worker_votes.end(), true);
    bool keep = rule == VerificationRule::unanimous ? yes == 3 : yes >= 2;
    if (keep) out.retained.push_back(v.pair_id);
  }
  out.voted = votes.size();
  out.retention_rate = out.voted ? static_cast<double>(out.retained.size()) / out.voted : 0.0;
  return out;
}

std::vector<std::string> sample_for_verification(std::vector<std::string> pairs, std::size_t n,
                                                 std::uint64_t seed) {
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  Rng rng = Rng::keyed(seed, {"verification-sample"});
  std::vector<std::string> out;
  for (auto i : sample_indices(pairs.size(), n, rng)) out.push_back(pairs[i]);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<std::string>> make_shards(std::vector<std::string> items, std::size_t k,
                                                  std::uint64_t seed, std::size_t partition) {
  if (k < 1) throw ValidationError("shard count must be at least 1");
  std::sort(items.begin(), items.end());
  Rng rng = Rng::keyed(seed, {"shard-partition", std::to_string(partition)});
  shuffle(items, rng);
  std::vector<std::vector<std::string>> shards(k);
  const std::size_t base = items.size() / k;
  const std::size_t extra = items.size() % k;
  std::size_t pos = 0;
  for (std::size_t s = 0; s < k; ++s) {
    std::size_t n = base + (s < extra ? 1 : 0);
    shards[s].assign(items.begin() + static_cast<std::ptrdiff_t>(pos),
                     items.begin() + static_cast<std::ptrdiff_t>(pos + n));
    std::sort(shards[s].begin(), shards[s].end());
    pos += n;
  }
  return shards;
}

ShardAssignment shard_for_epoch(const std::vector<std::string>& items, std::size_t k, std::uint64_t seed,
                                std::size_t epoch) {
  if (k < 1) throw ValidationError("shard count must be at least 1");
  ShardAssignment a;
  a.partition = epoch / k;
  a.shard = epoch % k;
  a.items = make_shards(items, k, seed, a.partition)[a.shard];
  return a;
}

std::size_t BatchSchedule::count(std::size_t batch, std::size_t source) const {
  return static_cast<std::size_t>(std::count_if(batches[batch].begin(), batches[batch].end(),
                                                [&](const BatchEntry& e) { return e.source == source; }));
}

BatchSchedule stratified_batches(const std::vector<SourceSize>& sources, std::size_t batch_size,
                                 std::uint64_t seed) {
  if (batch_size == 0) throw ValidationError("batch size must be positive");
  using Wide = __int128;
  const std::size_t m = sources.size();
  BatchSchedule sched;
  sched.batch_size = batch_size;
  sched.sources = sources;

  std::size_t total = 0;
  for (const auto& s : sources) total += s.size;
  if (total == 0) return sched;

  std::vector<std::vector<std::size_t>> order(m);
  for (std::size_t i = 0; i < m; ++i) {
    order[i].resize(sources[i].size);
    std::iota(order[i].begin(), order[i].end(), std::size_t{0});
    Rng rng = Rng::keyed(seed, {"schedule-source", std::to_string(i), sources[i].name});
    shuffle(order[i], rng);
  }

  const Wide N = static_cast<Wide>(total);
  const Wide B = static_cast<Wide>(batch_size);
  std::vector<std::size_t> base(m);
  std::size_t base_sum = 0;
  for (std::size_t i = 0; i < m; ++i) {
    base[i] = static_cast<std::size_t>(B * static_cast<Wide>(sources[i].size) / N);
    base_sum += base[i];
  }
  const std::size_t extra_slots = batch_size - base_sum;

  std::vector<std::size_t> used(m, 0);
  auto emit = [&](const std::vector<std::size_t>& counts) {
    std::vector<BatchEntry> batch;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t k = 0; k < counts[i]; ++k) batch.push_back({i, order[i][used[i]++]});
    sched.batches.push_back(std::move(batch));
  };

  const std::size_t full = total / batch_size;
  for (std::size_t b = 0; b < full; ++b) {
    // Deficit in units of 1/N: target share after this batch minus what the
    // source would hold with only its base quota.
    std::vector<std::pair<Wide, std::size_t>> deficit;
    for (std::size_t i = 0; i < m; ++i) {
      if (used[i] + base[i] >= sources[i].size) continue;
      Wide target = static_cast<Wide>(b + 1) * B * static_cast<Wide>(sources[i].size);
      Wide held = N * static_cast<Wide>(used[i] + base[i]);
      deficit.emplace_back(target - held, i);
    }
    std::stable_sort(deficit.begin(), deficit.end(),
                     [](const auto& a, const auto& c) { return a.first > c.first; });
    std::vector<std::size_t> counts = base;
    for (std::size_t r = 0; r < extra_slots && r < deficit.size(); ++r) ++counts[deficit[r].second];
    emit(counts);
  }

  std::vector<std::size_t> rest(m);
  std::size_t rest_total = 0;
  for (std::size_t i = 0; i < m; ++i) {
    rest[i] = sources[i].size - used[i];
    rest_total += rest[i];
  }
  if (rest_total > 0) emit(rest);
  return sched;
}

json batch_to_json(const BatchSchedule& s, std::size_t batch) {
  json entries = json::array();
  for (const auto& e : s.batches[batch]) entries.push_back(json::array({s.sources[e.source].name, e.index}));
  return json{{"batch", batch}, {"entries", entries}};
}

}  // namespace conceptkit
