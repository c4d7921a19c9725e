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

#include "conceptkit/cider.hpp"

#include <cctype>
#include <cmath>
#include <set>
#include <unordered_map>

#include "conceptkit/error.hpp"
#include "conceptkit/text.hpp"

namespace conceptkit {

namespace {

using NgramCounts = std::unordered_map<std::string, double>;

struct Cooked {
  std::vector<NgramCounts> counts;  // per order
  std::size_t length = 0;
};

Cooked cook(const std::string& caption, int max_n) {
  auto toks = caption_tokens(caption);
  Cooked c;
  c.counts.resize(static_cast<std::size_t>(max_n));
  c.length = toks.size();
  for (int n = 1; n <= max_n; ++n) {
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= toks.size(); ++i) {
      std::string g = toks[i];
      for (int k = 1; k < n; ++k) g += ' ' + toks[i + static_cast<std::size_t>(k)];
      c.counts[static_cast<std::size_t>(n - 1)][g] += 1.0;
    }
  }
  return c;
}

struct Vectorized {
  std::vector<NgramCounts> vec;
  std::vector<double> norm;
  std::size_t length = 0;
};

Vectorized vectorize(const Cooked& c, const std::unordered_map<std::string, double>& df, double log_ref_len) {
  Vectorized v;
  v.vec.resize(c.counts.size());
  v.norm.assign(c.counts.size(), 0.0);
  v.length = c.length;
  for (std::size_t n = 0; n < c.counts.size(); ++n) {
    for (const auto& [g, tf] : c.counts[n]) {
      auto it = df.find(g);
      double d = std::log(std::max(1.0, it == df.end() ? 0.0 : it->second));
      double w = tf * (log_ref_len - d);
      v.vec[n][g] = w;
      v.norm[n] += w * w;
    }
    v.norm[n] = std::sqrt(v.norm[n]);
  }
  return v;
}

double similarity(const Vectorized& hyp, const Vectorized& ref, double sigma) {
  const double delta = static_cast<double>(hyp.length) - static_cast<double>(ref.length);
  const double penalty = std::exp(-(delta * delta) / (2.0 * sigma * sigma));
  double total = 0.0;
  for (std::size_t n = 0; n < hyp.vec.size(); ++n) {
    double val = 0.0;
    for (const auto& [g, w] : hyp.vec[n]) {
      auto it = ref.vec[n].find(g);
      if (it != ref.vec[n].end()) val += std::min(w, it->second) * it->second;
    }
    if (hyp.norm[n] != 0 && ref.norm[n] != 0) val /= hyp.norm[n] * ref.norm[n];
    total += val * penalty;
  }
  return total / static_cast<double>(hyp.vec.size());
}

}  // namespace

std::vector<std::string> caption_tokens(const std::string& caption) {
  std::string s = to_lower(caption);
  for (char& c : s)
    if (std::ispunct(static_cast<unsigned char>(c))) c = ' ';
  return tokenize(s);
}

CiderResult cider_d(const std::map<std::string, std::string>& predictions,
                    const std::map<std::string, std::vector<std::string>>& references,
                    const CiderOptions& options) {
  if (options.max_n < 1) throw ValidationError("CIDEr-D needs max_n >= 1");
  std::map<std::string, std::vector<Cooked>> cooked_refs;
  for (const auto& [id, _] : predictions) {
    auto it = references.find(id);
    if (it == references.end() || it->second.empty()) throw ValidationError("no references for prediction '" + id + "'");
    for (const auto& r : it->second) cooked_refs[id].push_back(cook(r, options.max_n));
  }
  CiderResult result;
  if (predictions.empty()) return result;

  std::unordered_map<std::string, double> df;
  for (const auto& [id, refs] : cooked_refs) {
    std::set<std::string> present;
    for (const auto& r : refs)
      for (const auto& order : r.counts)
        for (const auto& [g, _] : order) present.insert(g);
    for (const auto& g : present) df[g] += 1.0;
  }
  const double log_ref_len = std::log(static_cast<double>(cooked_refs.size()));

  double sum = 0.0;
  for (const auto& [id, caption] : predictions) {
    auto hyp = vectorize(cook(caption, options.max_n), df, log_ref_len);
    double s = 0.0;
    const auto& refs = cooked_refs[id];
    for (const auto& r : refs) s += similarity(hyp, vectorize(r, df, log_ref_len), options.sigma);
    double score = 10.0 * s / static_cast<double>(refs.size());
    result.per_example[id] = score;
    sum += score;
  }
  result.score = sum / static_cast<double>(predictions.size());
  return result;
}

}  // namespace conceptkit
