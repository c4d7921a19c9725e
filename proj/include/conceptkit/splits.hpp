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
#include <string>
#include <vector>

#include "conceptkit/jsonl.hpp"
#include "conceptkit/search_ingest.hpp"

namespace conceptkit {

// "<query_id>#<16 hex digits of the URL hash>"; also the prefix of QA ids.
std::string pair_id(const std::string& query_id, const std::string& url);
std::string pair_id(const ImageRecord& r);

struct SplitSpec {
  std::size_t train_n = 0;
  std::size_t val_n = 0;
  std::size_t test_n = 0;
  std::uint64_t seed = 0;
};

struct Splits {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
};

// Ranks every (query, url) pair by a seeded hash and slices the ranking into
// train, val and test of exactly the requested sizes; anything past the sum
// is left out. Membership depends only on the pairs and the seed, never on
// manifest order. Each split is returned sorted.
Splits split_pairs(const Manifest& manifest, const SplitSpec& spec);

struct VerificationVote {
  std::string pair_id;
  std::vector<bool> worker_votes;  // exactly 3

  void validate() const;
};

VerificationVote vote_from_json(const json& j);

enum class VerificationRule { unanimous, majority };

VerificationRule parse_verification_rule(const std::string& s);

struct VerificationResult {
  std::vector<std::string> retained;  // in vote order
  std::size_t voted = 0;
  double retention_rate = 0.0;  // retained / voted, 0 when nothing was voted
};

// Throws ValidationError if a vote names a pair not in `pairs`, has other
// than 3 votes, or a pair is voted twice.
VerificationResult apply_verification(const std::vector<std::string>& pairs,
                                      const std::vector<VerificationVote>& votes,
                                      VerificationRule rule);

// Uniform seeded sample of n pairs, returned sorted.
std::vector<std::string> sample_for_verification(std::vector<std::string> pairs, std::size_t n,
                                                 std::uint64_t seed);

struct ShardAssignment {
  std::size_t partition = 0;  // which re-sharding of the data
  std::size_t shard = 0;
  std::vector<std::string> items;  // sorted
};

// k near-equal disjoint shards (sizes differ by at most one) from a seeded
// shuffle of the items; `partition` selects an independent shuffle.
std::vector<std::vector<std::string>> make_shards(std::vector<std::string> items, std::size_t k,
                                                  std::uint64_t seed, std::size_t partition);

// Epochs 0..k-1 walk the shards of partition 0, epochs k..2k-1 those of a
// fresh partition 1, and so on.
ShardAssignment shard_for_epoch(const std::vector<std::string>& items, std::size_t k, std::uint64_t seed,
                                std::size_t epoch);

struct SourceSize {
  std::string name;
  std::size_t size = 0;
};

struct BatchEntry {
  std::size_t source = 0;
  std::size_t index = 0;
  bool operator==(const BatchEntry&) const = default;
};

struct BatchSchedule {
  std::vector<std::vector<BatchEntry>> batches;
  std::size_t batch_size = 0;
  std::vector<SourceSize> sources;

  // Entries of `batch` drawn from `source`.
  std::size_t count(std::size_t batch, std::size_t source) const;
};

// One epoch of batches in which every source is represented in proportion to
// its size. Each full batch gives source i either floor(B*n_i/N) or one more
// slot; the extra slots go to the sources furthest behind their cumulative
// proportional share (ties to the lower index). The final batch may be short
// and takes whatever remains. Within a source, examples follow a seeded
// shuffle, so each example appears exactly once.
BatchSchedule stratified_batches(const std::vector<SourceSize>& sources, std::size_t batch_size,
                                 std::uint64_t seed);

json batch_to_json(const BatchSchedule& s, std::size_t batch);

}  // namespace conceptkit
