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

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "conceptkit/geometry.hpp"
#include "conceptkit/jsonl.hpp"

namespace conceptkit {

struct CandidateAnswer {
  std::string text;
  double logprob = 0.0;  // natural log, finite

  bool operator==(const CandidateAnswer&) const = default;
};

CandidateAnswer candidate_from_json(const json& j);
json to_json(const CandidateAnswer& c);

struct RankedAnswers {
  CandidateAnswer best;
  std::vector<CandidateAnswer> sorted;  // descending logprob, stable on ties
};

// Argmax by log-probability; ties go to the earlier candidate. Throws
// ValidationError on an empty list or a non-finite score.
RankedAnswers rank_answers(const std::vector<CandidateAnswer>& candidates);

struct RecalibrationConfig {
  std::set<std::string> seen_classes;  // normalized with normalize_answer
  double delta = 0.0;
};

RecalibrationConfig make_recalibration(const std::vector<std::string>& seen_classes, double delta);

// Subtracts delta from the log-probability of every candidate whose
// normalized text is a seen class.
std::vector<CandidateAnswer> recalibrate(const std::vector<CandidateAnswer>& candidates,
                                         const RecalibrationConfig& config);

struct LabeledCandidates {
  std::vector<CandidateAnswer> candidates;
  std::string gold;
};

// Top-1 accuracy of rank_answers after recalibration; answers compared after
// normalization.
double recalibrated_accuracy(const std::vector<LabeledCandidates>& examples,
                             const std::set<std::string>& seen_classes, double delta);

// 0.0, 0.25, ..., 10.0
std::vector<double> default_delta_grid();

struct DeltaFit {
  double delta = 0.0;
  double accuracy = 0.0;
  std::vector<std::pair<double, double>> curve;  // (delta, accuracy) per grid point
};

// Grid point with the best validation accuracy; ties go to the smallest
// delta. Throws ValidationError on an empty grid, empty validation set or a
// negative grid value.
DeltaFit fit_delta(const std::vector<LabeledCandidates>& val_examples,
                   const std::set<std::string>& seen_classes, std::vector<double> grid = default_delta_grid());

// Log-probabilities of decoding the class name and "other" from one region.
struct RegionScore {
  BoundingBox box;
  double logp_label = 0.0;
  double logp_other = 0.0;
};

RegionScore region_from_json(const json& j);

// Linear classifier over (logp_label, logp_other). The defaults give the
// log-odds of label versus other.
struct LblParams {
  double w_label = 1.0;
  double w_other = -1.0;
  double bias = 0.0;
};

double lbl_relevance(const RegionScore& region, const LblParams& params = {});

struct Detection {
  BoundingBox box;
  double score = 0.0;
  std::size_t region = 0;  // index in the input
};

// Every region scored with lbl_relevance, sorted by descending score (ties
// keep input order), optionally keeping only scores >= threshold.
std::vector<Detection> localize(const std::vector<RegionScore>& regions, const LblParams& params = {},
                                std::optional<double> score_threshold = std::nullopt);

// Least-squares fit of (w_label, w_other, bias) to 0/1 relevance targets.
// Throws ValidationError when fewer than 3 examples are given or the system
// is singular.
LblParams fit_lbl(const std::vector<RegionScore>& regions, const std::vector<bool>& is_target);

}  // namespace conceptkit
