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

#include "conceptkit/scoring.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "conceptkit/error.hpp"
#include "conceptkit/text.hpp"

namespace conceptkit {

CandidateAnswer candidate_from_json(const json& j) {
  CandidateAnswer c{j.at("text").get<std::string>(), j.at("logprob").get<double>()};
  if (!std::isfinite(c.logprob)) throw ValidationError("candidate '" + c.text + "' has a non-finite logprob");
  return c;
}

json to_json(const CandidateAnswer& c) { return json{{"text", c.text}, {"logprob", c.logprob}}; }

RankedAnswers rank_answers(const std::vector<CandidateAnswer>& candidates) {
  if (candidates.empty()) throw ValidationError("cannot rank an empty candidate list");
  for (const auto& c : candidates)
    if (!std::isfinite(c.logprob)) throw ValidationError("candidate '" + c.text + "' has a non-finite logprob");
  RankedAnswers r;
  r.sorted = candidates;
  std::stable_sort(r.sorted.begin(), r.sorted.end(),
                   [](const CandidateAnswer& a, const CandidateAnswer& b) { return a.logprob > b.logprob; });
  r.best = r.sorted.front();
  return r;
}

RecalibrationConfig make_recalibration(const std::vector<std::string>& seen_classes, double delta) {
  if (!(delta >= 0)) throw ValidationError("recalibration delta must be nonnegative");
  RecalibrationConfig cfg;
  cfg.delta = delta;
  for (const auto& s : seen_classes) cfg.seen_classes.insert(normalize_answer(s));
  return cfg;
}

std::vector<CandidateAnswer> recalibrate(const std::vector<CandidateAnswer>& candidates,
                                         const RecalibrationConfig& config) {
  if (!(config.delta >= 0)) throw ValidationError("recalibration delta must be nonnegative");
  std::vector<CandidateAnswer> out = candidates;
  if (config.delta == 0) return out;
  for (auto& c : out)
    if (config.seen_classes.count(normalize_answer(c.text))) c.logprob -= config.delta;
  return out;
}

double recalibrated_accuracy(const std::vector<LabeledCandidates>& examples,
                             const std::set<std::string>& seen_classes, double delta) {
  if (examples.empty()) return 0.0;
  RecalibrationConfig cfg{seen_classes, delta};
  std::size_t correct = 0;
  for (const auto& ex : examples) {
    auto best = rank_answers(recalibrate(ex.candidates, cfg)).best;
    if (normalize_answer(best.text) == normalize_answer(ex.gold)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

std::vector<double> default_delta_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 40; ++i) g.push_back(0.25 * i);
  return g;
}

DeltaFit fit_delta(const std::vector<LabeledCandidates>& val_examples,
                   const std::set<std::string>& seen_classes, std::vector<double> grid) {
  if (grid.empty()) throw ValidationError("delta grid is empty");
  if (val_examples.empty()) throw ValidationError("validation set is empty");
  for (double d : grid)
    if (!(d >= 0)) throw ValidationError("delta grid values must be nonnegative");
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::set<std::string> seen;
  for (const auto& s : seen_classes) seen.insert(normalize_answer(s));

  DeltaFit fit;
  fit.accuracy = -1.0;
  for (double d : grid) {
    double acc = recalibrated_accuracy(val_examples, seen, d);
    fit.curve.emplace_back(d, acc);
    if (acc > fit.accuracy) {
      fit.accuracy = acc;
      fit.delta = d;
    }
  }
  return fit;
}

RegionScore region_from_json(const json& j) {
  RegionScore r{box_from_json(j.at("box")), j.at("logp_label").get<double>(), j.at("logp_other").get<double>()};
  if (!std::isfinite(r.logp_label) || !std::isfinite(r.logp_other))
    throw ValidationError("region has a non-finite log-probability");
  return r;
}

double lbl_relevance(const RegionScore& region, const LblParams& params) {
  return params.w_label * region.logp_label + params.w_other * region.logp_other + params.bias;
}

std::vector<Detection> localize(const std::vector<RegionScore>& regions, const LblParams& params,
                                std::optional<double> score_threshold) {
  std::vector<Detection> out;
  out.reserve(regions.size());
  for (std::size_t i = 0; i < regions.size(); ++i) {
    double s = lbl_relevance(regions[i], params);
    if (score_threshold && s < *score_threshold) continue;
    out.push_back({regions[i].box, s, i});
  }
  std::stable_sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) { return a.score > b.score; });
  return out;
}

LblParams fit_lbl(const std::vector<RegionScore>& regions, const std::vector<bool>& is_target) {
  if (regions.size() != is_target.size()) throw ValidationError("fit_lbl: regions and labels differ in length");
  if (regions.size() < 3) throw ValidationError("fit_lbl needs at least 3 examples");
  // Normal equations A^T A w = A^T y with rows (logp_label, logp_other, 1).
  std::array<std::array<double, 4>, 3> m{};
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const std::array<double, 3> x{regions[i].logp_label, regions[i].logp_other, 1.0};
    const double y = is_target[i] ? 1.0 : 0.0;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) m[r][c] += x[r] * x[c];
      m[r][3] += x[r] * y;
    }
  }
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    if (std::abs(m[pivot][col]) < 1e-12) throw ValidationError("fit_lbl: singular system");
    std::swap(m[col], m[pivot]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      double f = m[r][col] / m[col][col];
      for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
    }
  }
  return LblParams{m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]};
}

}  // namespace conceptkit
