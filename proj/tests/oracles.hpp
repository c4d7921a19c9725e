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

// Slow reference implementations used to cross-check the library. They are
// written from the metric definitions, not from the library code.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "conceptkit/geometry.hpp"
#include "conceptkit/random.hpp"
#include "conceptkit/text.hpp"

namespace oracle {

using conceptkit::BoundingBox;

inline double iou(const BoundingBox& a, const BoundingBox& b) {
  double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0 || ih <= 0) return 0.0;
  double inter = iw * ih;
  return inter / ((a.x2 - a.x1) * (a.y2 - a.y1) + (b.x2 - b.x1) * (b.y2 - b.y1) - inter);
}

// Visiting order: highest score first, lower index on ties.
inline std::vector<std::size_t> score_order(const std::vector<double>& scores) {
  std::vector<std::size_t> order;
  std::vector<bool> used(scores.size(), false);
  for (std::size_t round = 0; round < scores.size(); ++round) {
    std::size_t best = scores.size();
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (used[i]) continue;
      if (best == scores.size() || scores[i] > scores[best]) best = i;
    }
    used[best] = true;
    order.push_back(best);
  }
  return order;
}

inline std::vector<std::size_t> nms(const std::vector<BoundingBox>& boxes, const std::vector<double>& scores,
                                    double threshold) {
  std::vector<std::size_t> kept;
  for (std::size_t i : score_order(scores)) {
    bool suppressed = false;
    for (std::size_t k : kept)
      if (oracle::iou(boxes[i], boxes[k]) > threshold) suppressed = true;
    if (!suppressed) kept.push_back(i);
  }
  return kept;
}

// AP as (1/G) * sum over true positives of the best precision reached at that
// rank or any later rank.
inline double ap_from_flags(const std::vector<bool>& tp, std::size_t n_gt) {
  if (n_gt == 0) return 0.0;
  std::vector<double> precision(tp.size());
  double hits = 0;
  for (std::size_t i = 0; i < tp.size(); ++i) {
    if (tp[i]) hits += 1;
    precision[i] = hits / static_cast<double>(i + 1);
  }
  double total = 0;
  for (std::size_t i = 0; i < tp.size(); ++i) {
    if (!tp[i]) continue;
    double best = 0;
    for (std::size_t j = i; j < tp.size(); ++j) best = std::max(best, precision[j]);
    total += best;
  }
  return total / static_cast<double>(n_gt);
}

inline double detection_ap(const std::vector<BoundingBox>& dets, const std::vector<double>& scores,
                           const std::vector<BoundingBox>& gts, double threshold) {
  std::vector<bool> taken(gts.size(), false);
  std::vector<bool> tp;
  for (std::size_t i : score_order(scores)) {
    std::size_t pick = gts.size();
    double pick_iou = -1;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) continue;
      double v = oracle::iou(dets[i], gts[g]);
      if (v > pick_iou) {
        pick_iou = v;
        pick = g;
      }
    }
    bool hit = pick < gts.size() && pick_iou >= threshold;
    if (hit) taken[pick] = true;
    tp.push_back(hit);
  }
  return ap_from_flags(tp, gts.size());
}

struct Triple {
  std::string image;
  BoundingBox person, object;
  std::string cls;
  double score = 0;
};

// Per-class AP over every class with ground truth, and their mean.
inline std::pair<std::map<std::string, double>, double> hoi_ap(const std::vector<Triple>& preds,
                                                               const std::vector<Triple>& gts, double threshold) {
  std::set<std::string> classes;
  for (const auto& g : gts) classes.insert(g.cls);
  std::map<std::string, double> per;
  for (const auto& cls : classes) {
    std::vector<double> scores;
    std::vector<const Triple*> ps;
    for (const auto& p : preds)
      if (p.cls == cls) {
        ps.push_back(&p);
        scores.push_back(p.score);
      }
    std::vector<bool> taken(gts.size(), false);
    std::size_t n_gt = 0;
    for (const auto& g : gts) n_gt += g.cls == cls;
    std::vector<bool> tp;
    for (std::size_t i : score_order(scores)) {
      const Triple& p = *ps[i];
      std::size_t pick = gts.size();
      double pick_v = -1;
      for (std::size_t g = 0; g < gts.size(); ++g) {
        if (taken[g] || gts[g].cls != cls || gts[g].image != p.image) continue;
        double v = std::min(oracle::iou(p.person, gts[g].person), oracle::iou(p.object, gts[g].object));
        if (v > pick_v) {
          pick_v = v;
          pick = g;
        }
      }
      bool hit = pick < gts.size() && pick_v >= threshold;
      if (hit) taken[pick] = true;
      tp.push_back(hit);
    }
    per[cls] = ap_from_flags(tp, n_gt);
  }
  double mean = 0;
  for (const auto& [_, v] : per) mean += v;
  if (!per.empty()) mean /= static_cast<double>(per.size());
  return {per, mean};
}

inline double vqa_accuracy(const std::string& pred, const std::vector<std::string>& refs) {
  int n = 0;
  for (const auto& r : refs) n += conceptkit::normalize_answer(r) == conceptkit::normalize_answer(pred);
  return n >= 3 ? 1.0 : n / 3.0;
}

// CIDEr-D with n-grams kept as token vectors and every count done by linear
// scans.
namespace cider_detail {

using Gram = std::vector<std::string>;

inline std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || u >= 128) {
      cur += static_cast<char>(std::tolower(u));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline std::vector<Gram> grams(const std::vector<std::string>& w, std::size_t n) {
  std::vector<Gram> out;
  for (std::size_t i = 0; i + n <= w.size(); ++i) out.emplace_back(w.begin() + i, w.begin() + i + n);
  return out;
}

inline double count(const std::vector<Gram>& gs, const Gram& g) {
  double c = 0;
  for (const auto& x : gs) c += x == g;
  return c;
}

}  // namespace cider_detail

inline std::map<std::string, double> cider_d(const std::map<std::string, std::string>& preds,
                                             const std::map<std::string, std::vector<std::string>>& refs,
                                             double sigma = 6.0) {
  using namespace cider_detail;
  const double n_docs = static_cast<double>(preds.size());
  auto df = [&](const Gram& g) {
    double d = 0;
    for (const auto& [id, _] : preds) {
      bool found = false;
      for (const auto& r : refs.at(id)) {
        auto w = words(r);
        if (count(grams(w, g.size()), g) > 0) found = true;
      }
      d += found;
    }
    return d;
  };
  auto weights = [&](const std::vector<std::string>& w, std::size_t n) {
    std::vector<std::pair<Gram, double>> out;
    for (const auto& g : grams(w, n)) {
      bool dup = false;
      for (const auto& [h, _] : out) dup |= h == g;
      if (dup) continue;
      out.push_back({g, count(grams(w, n), g) * (std::log(n_docs) - std::log(std::max(1.0, df(g))))});
    }
    return out;
  };
  auto lookup = [](const std::vector<std::pair<Gram, double>>& v, const Gram& g) {
    for (const auto& [h, x] : v)
      if (h == g) return x;
    return 0.0;
  };
  auto norm = [](const std::vector<std::pair<Gram, double>>& v) {
    double s = 0;
    for (const auto& [_, x] : v) s += x * x;
    return std::sqrt(s);
  };
  std::map<std::string, double> out;
  for (const auto& [id, caption] : preds) {
    auto cw = words(caption);
    double total = 0;
    for (const auto& r : refs.at(id)) {
      auto rw = words(r);
      double d = static_cast<double>(cw.size()) - static_cast<double>(rw.size());
      double per_n = 0;
      for (std::size_t n = 1; n <= 4; ++n) {
        auto vc = weights(cw, n), vr = weights(rw, n);
        double dot = 0;
        for (const auto& [g, x] : vc) dot += std::min(x, lookup(vr, g)) * lookup(vr, g);
        double nc = norm(vc), nr = norm(vr);
        double sim = (nc != 0 && nr != 0) ? dot / (nc * nr) : dot;
        per_n += sim * std::exp(-(d * d) / (2 * sigma * sigma));
      }
      total += per_n / 4.0;
    }
    out[id] = 10.0 * total / static_cast<double>(refs.at(id).size());
  }
  return out;
}

inline BoundingBox random_box(conceptkit::Rng& rng, double extent = 20.0) {
  double x1 = static_cast<double>(rng.below(static_cast<std::uint64_t>(extent)));
  double y1 = static_cast<double>(rng.below(static_cast<std::uint64_t>(extent)));
  double w = 1.0 + static_cast<double>(rng.below(static_cast<std::uint64_t>(extent / 2)));
  double h = 1.0 + static_cast<double>(rng.below(static_cast<std::uint64_t>(extent / 2)));
  return BoundingBox{x1, y1, x1 + w, y1 + h};
}

}  // namespace oracle
