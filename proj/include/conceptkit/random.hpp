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
#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace conceptkit {

// 64-bit FNV-1a. Stable across platforms and runs, unlike std::hash.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis = 0xcbf29ce484222325ULL);

std::uint64_t splitmix64(std::uint64_t x);

// Hash of a seed and an ordered list of string keys. Keys are length-prefixed
// so ("ab","c") and ("a","bc") differ.
std::uint64_t keyed_hash(std::uint64_t seed, std::initializer_list<std::string_view> keys);

// Maps a 64-bit hash to [0, 1).
double unit_interval(std::uint64_t h);

std::string hex64(std::uint64_t v);

// Counter-based generator: output i is splitmix64(key + i * gamma). Streams
// derived from distinct keys are independent, so results never depend on the
// order in which other streams were consumed.
class Rng {
 public:
  explicit Rng(std::uint64_t key) : key_(key) {}

  static Rng keyed(std::uint64_t seed, std::initializer_list<std::string_view> keys) {
    return Rng(keyed_hash(seed, keys));
  }

  std::uint64_t next();

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  double unit() { return unit_interval(next()); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

// k distinct indices from [0, n), uniformly, in draw order. k is clamped to n.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, Rng& rng);

}  // namespace conceptkit
