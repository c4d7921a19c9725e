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
#include "conceptkit/jsonl.hpp"

namespace conceptkit {

inline constexpr const char* kNoInteraction = "no interaction";

// Present participle of an English verb ("ride" -> "riding", "sit" ->
// "sitting", "lie" -> "lying"). Words already ending in "ing" are returned
// unchanged; underscores become spaces and only the first word is inflected.
std::string gerund(const std::string& verb);

// Decoder target text for an HOI class, e.g. ("ride", "horse") -> "riding the horse".
std::string hoi_label_text(const std::string& verb, const std::string& object);

struct HOIAnnotation {
  BoundingBox person;
  BoundingBox object;
  std::string verb;
  std::string object_name;
};

struct HOITargets {
  std::vector<BoundingBox> persons;  // after duplicate pruning, in kept order
  std::vector<BoundingBox> regions;  // detector boxes, then appended ground-truth boxes
  std::size_t appended = 0;
  // For each input annotation, the (person, region) it was assigned to.
  std::vector<std::pair<std::size_t, std::size_t>> assignment;
  // labels[p][r]: sorted label texts for region r when person p is the
  // query box; {"no interaction"} for regions with no annotation.
  std::vector<std::vector<std::vector<std::string>>> labels;
};

// Builds second-pass training targets for one image:
//  1. Person boxes are de-duplicated with NMS at `person_nms` (uniform
//     scores, so earlier boxes win); each annotation moves to the kept person
//     box with the highest IoU.
//  2. Each object box is aligned to the region with the highest IoU if that
//     IoU is at least `align_iou`; otherwise the object box itself is
//     appended to the regions.
//  3. Aligned regions are labelled with every matching class text.
HOITargets hoi_build_targets(const std::vector<HOIAnnotation>& annotations,
                             const std::vector<BoundingBox>& detector_boxes, double person_nms = 0.7,
                             double align_iou = 0.5);

struct PersonDetection {
  BoundingBox box;
  double score = 0.0;  // probability in [0, 1]
};

// One (person, object region) pair scored by the second pass.
struct HOICandidate {
  std::size_t person_index = 0;
  BoundingBox person;
  double person_score = 0.0;
  BoundingBox object;
  std::map<std::string, double> interaction_logprobs;  // class -> log p(class text)
  double no_interaction_logprob = 0.0;
};

struct HOITriple {
  std::string image_id;
  BoundingBox person;
  BoundingBox object;
  std::string hoi_class;
  double score = 0.0;
};

json to_json(const HOITriple& t);

struct HOIInferOptions {
  double person_threshold = 0.5;
  // When set, an object is pruned if exp(no_interaction_logprob) exceeds it.
  // Otherwise it is pruned when "no interaction" beats every class.
  std::optional<double> prune_threshold;
};

// Reads one HOI prediction record ({"image_id", "persons", "pairs"}) into
// candidates. Throws ValidationError on a dangling person_idx.
std::vector<HOICandidate> hoi_candidates_from_json(const json& record);

// Keeps persons scoring above the threshold, prunes no-interaction objects,
// and emits one triple per remaining (person, object, class) scored by the
// class log-probability, sorted by descending score (stable).
std::vector<HOITriple> hoi_infer(const std::string& image_id, const std::vector<HOICandidate>& candidates,
                                 const HOIInferOptions& options = {});

}  // namespace conceptkit
