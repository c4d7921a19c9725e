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

#include "conceptkit/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "conceptkit/error.hpp"
#include "conceptkit/text.hpp"

namespace conceptkit {

json EvalReport::to_json() const {
  json j;
  j["task"] = task;
  j["overall"] = overall;
  j["per_category"] = per_category;
  j["per_answer_type"] = per_answer_type ? json(*per_answer_type) : json(nullptr);
  j["n_examples"] = n_examples;
  if (!notes.empty()) j["notes"] = notes;
  return j;
}

EvalReport EvalReport::from_json(const json& j) {
  EvalReport r;
  try {
    r.task = j.at("task").get<std::string>();
    r.overall = j.at("overall").get<double>();
    r.per_category = j.value("per_category", std::map<std::string, double>{});
    if (j.contains("per_answer_type") && !j["per_answer_type"].is_null())
      r.per_answer_type = j["per_answer_type"].get<std::map<std::string, double>>();
    r.n_examples = j.at("n_examples").get<std::size_t>();
    if (j.contains("notes")) r.notes = j["notes"].get<std::map<std::string, std::string>>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad eval report: ") + e.what());
  }
  return r;
}

double vqa_accuracy(const std::string& prediction, const std::vector<std::string>& references) {
  const std::string p = normalize_answer(prediction);
  double matches = 0;
  for (const auto& r : references)
    if (normalize_answer(r) == p) matches += 1;
  return std::min(matches / 3.0, 1.0);
}

namespace {

double average_precision(const std::vector<bool>& tp_flags, std::size_t n_gt) {
  if (n_gt == 0) return 0.0;
  std::vector<double> mrec{0.0}, mpre{0.0};
  double tp = 0;
  for (std::size_t i = 0; i < tp_flags.size(); ++i) {
    if (tp_flags[i]) tp += 1;
    mrec.push_back(tp / static_cast<double>(n_gt));
    mpre.push_back(tp / static_cast<double>(i + 1));
  }
  mrec.push_back(1.0);
  mpre.push_back(0.0);
  for (std::size_t i = mpre.size() - 1; i > 0; --i) mpre[i - 1] = std::max(mpre[i - 1], mpre[i]);
  double ap = 0;
  for (std::size_t i = 1; i < mrec.size(); ++i)
    if (mrec[i] != mrec[i - 1]) ap += (mrec[i] - mrec[i - 1]) * mpre[i];
  return ap;
}

template <typename T, typename Score>
std::vector<std::size_t> by_descending_score(const std::vector<T>& items, Score score) {
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return score(items[a]) > score(items[b]); });
  return order;
}

}  // namespace

double detection_ap(std::vector<ScoredBox> detections, const std::vector<BoundingBox>& gts, double iou_threshold) {
  auto order = by_descending_score(detections, [](const ScoredBox& d) { return d.score; });
  std::vector<bool> matched(gts.size(), false);
  std::vector<bool> flags;
  flags.reserve(order.size());
  for (std::size_t i : order) {
    double best = -1;
    std::size_t best_j = gts.size();
    for (std::size_t j = 0; j < gts.size(); ++j) {
      if (matched[j]) continue;
      double v = iou(detections[i].box, gts[j]);
      if (v > best) {
        best = v;
        best_j = j;
      }
    }
    bool tp = best_j < gts.size() && best >= iou_threshold;
    if (tp) matched[best_j] = true;
    flags.push_back(tp);
  }
  return average_precision(flags, gts.size());
}

EvalReport localization_map(const std::vector<LocalizationSample>& samples, double iou_threshold) {
  EvalReport r;
  r.task = "localization";
  r.n_examples = samples.size();
  std::map<std::string, std::pair<double, std::size_t>> cats;
  double sum = 0;
  for (const auto& s : samples) {
    double ap = detection_ap(s.detections, s.gts, iou_threshold);
    sum += ap;
    auto& c = cats[s.category];
    c.first += ap;
    c.second += 1;
  }
  if (!samples.empty()) r.overall = sum / static_cast<double>(samples.size());
  for (const auto& [name, c] : cats) r.per_category[name] = c.first / static_cast<double>(c.second);
  return r;
}

HOIAPResult hoi_ap(const std::vector<HOITriple>& triples, const std::vector<HOIGroundTruth>& gts,
                   double iou_threshold) {
  std::map<std::string, std::vector<std::size_t>> gt_by_class;
  for (std::size_t i = 0; i < gts.size(); ++i) gt_by_class[gts[i].hoi_class].push_back(i);
  std::map<std::string, std::vector<HOITriple>> pred_by_class;
  for (const auto& t : triples) pred_by_class[t.hoi_class].push_back(t);

  HOIAPResult result;
  for (const auto& [cls, gt_idx] : gt_by_class) {
    const auto& preds = pred_by_class[cls];
    auto order = by_descending_score(preds, [](const HOITriple& t) { return t.score; });
    std::vector<bool> matched(gt_idx.size(), false);
    std::vector<bool> flags;
    for (std::size_t i : order) {
      const auto& p = preds[i];
      double best = -1;
      std::size_t best_j = gt_idx.size();
      for (std::size_t j = 0; j < gt_idx.size(); ++j) {
        const auto& g = gts[gt_idx[j]];
        if (matched[j] || g.image_id != p.image_id) continue;
        double v = std::min(iou(p.person, g.person), iou(p.object, g.object));
        if (v > best) {
          best = v;
          best_j = j;
        }
      }
      bool tp = best_j < gt_idx.size() && best >= iou_threshold;
      if (tp) matched[best_j] = true;
      flags.push_back(tp);
    }
    result.per_class[cls] = average_precision(flags, gt_idx.size());
  }
  if (!result.per_class.empty()) {
    double s = 0;
    for (const auto& [_, v] : result.per_class) s += v;
    result.mean = s / static_cast<double>(result.per_class.size());
  }
  return result;
}

EvalReport web10k_accuracy(const std::vector<TypedResult>& results) {
  EvalReport r;
  r.task = "web10k";
  r.n_examples = results.size();
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& x : results) {
    auto& c = counts[to_string(x.answer_type)];
    c.first += x.correct ? 1 : 0;
    c.second += 1;
  }
  std::map<std::string, double> per_type;
  double macro = 0;
  std::size_t n_types = 0;
  for (const auto& [name, c] : counts) {
    double acc = static_cast<double>(c.first) / static_cast<double>(c.second);
    per_type[name] = acc;
    if (name != to_string(AnswerType::entire_query)) {
      macro += acc;
      ++n_types;
    }
  }
  if (n_types > 0) r.overall = macro / static_cast<double>(n_types);
  r.per_answer_type = per_type;
  return r;
}

int topk_accuracy(const std::vector<CandidateAnswer>& candidates, const std::string& gold, std::size_t k) {
  if (candidates.empty()) return 0;
  auto ranked = rank_answers(candidates).sorted;
  const std::string g = normalize_answer(gold);
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i)
    if (normalize_answer(ranked[i].text) == g) return 1;
  return 0;
}

}  // namespace conceptkit
