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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "conceptkit/hoi.hpp"
#include "conceptkit/jsonl.hpp"
#include "conceptkit/scoring.hpp"
#include "conceptkit/templating.hpp"

namespace conceptkit {

// Model-exported prediction files are JSON-Lines with an optional first
// record {"_header": {"logprob_norm": "sum" | "mean", ...}} declaring whether
// sequence log-probabilities are summed or length-normalized.
struct PredictionHeader {
  std::optional<std::string> logprob_norm;
};

// Throws ValidationError for a logprob_norm other than "sum" or "mean".
PredictionHeader read_prediction_header(const std::filesystem::path& path);

// {"id", "candidates": [{"text", "logprob"}]}, keyed by id.
std::map<std::string, std::vector<CandidateAnswer>> load_candidate_predictions(const std::filesystem::path& path);

// {"id", "regions": [{"box", "logp_label", "logp_other"}]}, keyed by id.
std::map<std::string, std::vector<RegionScore>> load_region_predictions(const std::filesystem::path& path);

struct HOIPrediction {
  std::string image_id;
  std::vector<HOICandidate> candidates;
};

std::vector<HOIPrediction> load_hoi_predictions(const std::filesystem::path& path);

// {"id", "caption"}, keyed by id.
std::map<std::string, std::string> load_caption_predictions(const std::filesystem::path& path);

// Candidate lists for QA examples: the gold answer plus up to `distractors`
// other answers of the same type. The gold answer gets the top score with
// probability `accuracy`, decided per example by a stream keyed on the seed
// and the example id.
std::vector<json> mock_candidate_predictions(const std::vector<QAExample>& qas, std::uint64_t seed,
                                             double accuracy = 0.7, std::size_t distractors = 4);

}  // namespace conceptkit
