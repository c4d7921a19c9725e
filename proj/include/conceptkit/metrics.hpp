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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "conceptkit/geometry.hpp"
#include "conceptkit/hoi.hpp"
#include "conceptkit/jsonl.hpp"
#include "conceptkit/scoring.hpp"
#include "conceptkit/templating.hpp"

namespace conceptkit {

struct EvalReport {
  std::string task;
  double overall = 0.0;
  std::map<std::string, double> per_category;
  std::optional<std::map<std::string, double>> per_answer_type;
  std::size_t n_examples = 0;
  std::map<std::string, std::string> notes;

  json to_json() const;
  static EvalReport from_json(const json& j);
};

// min(#references equal to the prediction / 3, 1), compared after
// normalize_answer. No leave-one-out averaging: with fewer than 10 references
// the same formula is applied to whatever is there.
double vqa_accuracy(const std::string& prediction, const std::vector<std::string>& references);

struct ScoredBox {
  BoundingBox box;
  double score = 0.0;
};

// Average precision of a ranked detection list against ground-truth boxes.
// Detections are visited by descending score (stable); each one is a true
// positive if the unmatched ground truth with the highest IoU has IoU >=
// threshold. AP is the area under the precision envelope (all-point
// interpolation). Returns 0 when there is no ground truth.
double detection_ap(std::vector<ScoredBox> detections, const std::vector<BoundingBox>& gts,
                    double iou_threshold = 0.5);

struct LocalizationSample {
  std::string id;
  std::string category;
  std::vector<ScoredBox> detections;
  std::vector<BoundingBox> gts;
};

// detection_ap per (image, query) sample, averaged; per-category means in
// per_category.
EvalReport localization_map(const std::vector<LocalizationSample>& samples, double iou_threshold = 0.5);

struct HOIGroundTruth {
  std::string image_id;
  BoundingBox person;
  BoundingBox object;
  std::string hoi_class;
};

struct HOIAPResult {
  std::map<std::string, double> per_class;  // classes with at least one ground truth
  double mean = 0.0;
};

// Per class: a predicted triple is a true positive when an unmatched ground
// truth pair of the same class and image has person IoU and object IoU both
// >= threshold (the pair with the largest min(IoU_person, IoU_object) is
// taken). AP as in detection_ap; mean over classes with ground truth.
HOIAPResult hoi_ap(const std::vector<HOITriple>& triples, const std::vector<HOIGroundTruth>& gts,
                   double iou_threshold = 0.5);

struct TypedResult {
  AnswerType answer_type = AnswerType::noun;
  bool correct = false;
};

// Per-type accuracy for noun, verb and adjective questions; overall is their
// unweighted mean over the types present. Entire-query questions are counted
// in n_examples but not in the macro average.
EvalReport web10k_accuracy(const std::vector<TypedResult>& results);

// 1 if the normalized gold answer is among the k highest-scoring candidates
// (ties keep input order), else 0.
int topk_accuracy(const std::vector<CandidateAnswer>& candidates, const std::string& gold, std::size_t k);

}  // namespace conceptkit
