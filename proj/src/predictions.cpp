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

#include "conceptkit/predictions.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "conceptkit/error.hpp"
#include "conceptkit/random.hpp"
#include "conceptkit/text.hpp"

namespace conceptkit {

namespace {

template <typename Fn>
auto parse_record(const std::filesystem::path& path, std::size_t line, Fn fn) {
  try {
    return fn();
  } catch (const ParseError&) {
    throw;
  } catch (const json::exception& e) {
    throw ParseError(path.string(), line, e.what());
  } catch (const ValidationError& e) {
    throw ParseError(path.string(), line, e.what());
  }
}

void require_new(bool inserted, const std::filesystem::path& path, std::size_t line, const std::string& id) {
  if (!inserted) throw ParseError(path.string(), line, "duplicate prediction id '" + id + "'");
}

}  // namespace

PredictionHeader read_prediction_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  PredictionHeader h;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_object() && j.contains(kHeaderKey) && j[kHeaderKey].contains("logprob_norm")) {
      const auto& v = j[kHeaderKey]["logprob_norm"];
      if (!v.is_string() || (v != "sum" && v != "mean"))
        throw ValidationError(path.string() + ": logprob_norm must be \"sum\" or \"mean\"");
      h.logprob_norm = v.get<std::string>();
    }
    break;
  }
  return h;
}

std::map<std::string, std::vector<CandidateAnswer>> load_candidate_predictions(const std::filesystem::path& path) {
  std::map<std::string, std::vector<CandidateAnswer>> out;
  for_each_jsonl(path, [&](const json& j, std::size_t line) {
    parse_record(path, line, [&] {
      std::vector<CandidateAnswer> cands;
      for (const auto& c : j.at("candidates")) cands.push_back(candidate_from_json(c));
      auto id = j.at("id").get<std::string>();
      require_new(out.emplace(id, std::move(cands)).second, path, line, id);
      return 0;
    });
  });
  return out;
}

std::map<std::string, std::vector<RegionScore>> load_region_predictions(const std::filesystem::path& path) {
  std::map<std::string, std::vector<RegionScore>> out;
  for_each_jsonl(path, [&](const json& j, std::size_t line) {
    parse_record(path, line, [&] {
      std::vector<RegionScore> regions;
      for (const auto& r : j.at("regions")) regions.push_back(region_from_json(r));
      auto id = j.at("id").get<std::string>();
      require_new(out.emplace(id, std::move(regions)).second, path, line, id);
      return 0;
    });
  });
  return out;
}

std::vector<HOIPrediction> load_hoi_predictions(const std::filesystem::path& path) {
  std::vector<HOIPrediction> out;
  std::set<std::string> seen;
  for_each_jsonl(path, [&](const json& j, std::size_t line) {
    parse_record(path, line, [&] {
      HOIPrediction p;
      p.image_id = j.at("image_id").get<std::string>();
      p.candidates = hoi_candidates_from_json(j);
      require_new(seen.insert(p.image_id).second, path, line, p.image_id);
      out.push_back(std::move(p));
      return 0;
    });
  });
  return out;
}

std::map<std::string, std::string> load_caption_predictions(const std::filesystem::path& path) {
  std::map<std::string, std::string> out;
  for_each_jsonl(path, [&](const json& j, std::size_t line) {
    parse_record(path, line, [&] {
      auto id = j.at("id").get<std::string>();
      require_new(out.emplace(id, j.at("caption").get<std::string>()).second, path, line, id);
      return 0;
    });
  });
  return out;
}

std::vector<json> mock_candidate_predictions(const std::vector<QAExample>& qas, std::uint64_t seed,
                                             double accuracy, std::size_t distractors) {
  if (!(accuracy >= 0.0 && accuracy <= 1.0)) throw ValidationError("mock accuracy must be in [0, 1]");
  std::map<AnswerType, std::vector<std::string>> answers;
  for (const auto& qa : qas) answers[qa.answer_type].push_back(qa.answer);
  for (auto& [_, v] : answers) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }

  std::vector<json> out;
  out.reserve(qas.size());
  for (const auto& qa : qas) {
    Rng rng = Rng::keyed(seed, {"mock", qa.id});
    std::vector<std::string> others;
    for (const auto& a : answers[qa.answer_type])
      if (a != qa.answer) others.push_back(a);
    std::vector<std::string> texts{qa.answer};
    for (std::size_t i : sample_indices(others.size(), distractors, rng)) texts.push_back(others[i]);

    std::vector<double> scores(texts.size());
    for (auto& s : scores) s = -0.05 - 4.0 * rng.unit();
    const bool gold_wins = rng.unit() < accuracy;
    auto top = std::max_element(scores.begin() + 1, scores.end());
    if (top != scores.end()) {
      if (gold_wins && *top >= scores[0]) std::swap(*top, scores[0]);
      if (!gold_wins && *top < scores[0]) std::swap(*top, scores[0]);
      if (!gold_wins && *top == scores[0]) *top += 0.01;
    }

    json cands = json::array();
    for (std::size_t i = 0; i < texts.size(); ++i) {
      double lp = std::round(scores[i] * 1e6) / 1e6;
      cands.push_back({{"text", texts[i]}, {"logprob", lp}});
    }
    out.push_back({{"id", qa.id}, {"candidates", cands}});
  }
  return out;
}

}  // namespace conceptkit
