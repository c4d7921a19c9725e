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

#include "conceptkit/hoi.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "conceptkit/error.hpp"
#include "conceptkit/text.hpp"

namespace conceptkit {

namespace {

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

std::string inflect(const std::string& w) {
  if (w.size() < 2 || ends_with(w, "ing")) return w;
  if (ends_with(w, "ie")) return w.substr(0, w.size() - 2) + "ying";
  if (ends_with(w, "ee") || ends_with(w, "ye") || ends_with(w, "oe")) return w + "ing";
  if (w.back() == 'e') return w.substr(0, w.size() - 1) + "ing";
  // Single-vowel consonant-vowel-consonant words double the final consonant.
  const std::size_t n = w.size();
  const int vowels = static_cast<int>(std::count_if(w.begin(), w.end(), is_vowel));
  if (n >= 3 && vowels == 1 && !is_vowel(w[n - 1]) && is_vowel(w[n - 2]) && !is_vowel(w[n - 3]) &&
      w[n - 1] != 'w' && w[n - 1] != 'x' && w[n - 1] != 'y')
    return w + w.back() + "ing";
  return w + "ing";
}

std::string underscores_to_spaces(std::string s) {
  std::replace(s.begin(), s.end(), '_', ' ');
  return s;
}

}  // namespace

std::string gerund(const std::string& verb) {
  auto words = tokenize(to_lower(underscores_to_spaces(verb)));
  if (words.empty()) return {};
  words[0] = inflect(words[0]);
  return join(words, " ");
}

std::string hoi_label_text(const std::string& verb, const std::string& object) {
  return gerund(verb) + " the " + join(tokenize(to_lower(underscores_to_spaces(object))), " ");
}

HOITargets hoi_build_targets(const std::vector<HOIAnnotation>& annotations,
                             const std::vector<BoundingBox>& detector_boxes, double person_nms,
                             double align_iou) {
  HOITargets t;
  std::vector<BoundingBox> all_persons;
  for (const auto& a : annotations) all_persons.push_back(a.person);
  const std::vector<double> uniform(all_persons.size(), 1.0);
  auto kept = nms(all_persons, uniform, person_nms);
  for (auto k : kept) t.persons.push_back(all_persons[k]);

  t.regions = detector_boxes;
  const std::size_t detector_count = detector_boxes.size();
  for (const auto& a : annotations) {
    std::size_t best_p = 0;
    double best_p_iou = -1.0;
    for (std::size_t p = 0; p < t.persons.size(); ++p) {
      double v = iou(a.person, t.persons[p]);
      if (v > best_p_iou) {
        best_p_iou = v;
        best_p = p;
      }
    }
    std::size_t best_r = 0;
    double best_r_iou = -1.0;
    for (std::size_t r = 0; r < t.regions.size(); ++r) {
      double v = iou(a.object, t.regions[r]);
      if (v > best_r_iou) {
        best_r_iou = v;
        best_r = r;
      }
    }
    if (best_r_iou < align_iou) {
      t.regions.push_back(a.object);
      best_r = t.regions.size() - 1;
    }
    t.assignment.emplace_back(best_p, best_r);
  }
  t.appended = t.regions.size() - detector_count;

  std::vector<std::vector<std::set<std::string>>> sets(t.persons.size(),
                                                       std::vector<std::set<std::string>>(t.regions.size()));
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    auto [p, r] = t.assignment[i];
    sets[p][r].insert(hoi_label_text(annotations[i].verb, annotations[i].object_name));
  }
  t.labels.resize(t.persons.size());
  for (std::size_t p = 0; p < t.persons.size(); ++p) {
    for (std::size_t r = 0; r < t.regions.size(); ++r) {
      if (sets[p][r].empty()) {
        t.labels[p].push_back({kNoInteraction});
      } else {
        t.labels[p].emplace_back(sets[p][r].begin(), sets[p][r].end());
      }
    }
  }
  return t;
}

json to_json(const HOITriple& t) {
  return json{{"image_id", t.image_id},
              {"person", to_json(t.person)},
              {"object", to_json(t.object)},
              {"class", t.hoi_class},
              {"score", t.score}};
}

std::vector<HOICandidate> hoi_candidates_from_json(const json& record) {
  std::vector<PersonDetection> persons;
  for (const auto& p : record.at("persons")) {
    PersonDetection d{box_from_json(p.at("box")), p.at("score").get<double>()};
    if (!(d.score >= 0 && d.score <= 1)) throw ValidationError("person score must lie in [0,1]");
    persons.push_back(d);
  }
  std::vector<HOICandidate> out;
  for (const auto& pr : record.at("pairs")) {
    HOICandidate c;
    c.person_index = pr.at("person_idx").get<std::size_t>();
    if (c.person_index >= persons.size())
      throw ValidationError("pair references person " + std::to_string(c.person_index) + " of " +
                            std::to_string(persons.size()));
    c.person = persons[c.person_index].box;
    c.person_score = persons[c.person_index].score;
    c.object = box_from_json(pr.at("box"));
    for (auto& [k, v] : pr.at("labels").items()) c.interaction_logprobs[k] = v.get<double>();
    c.no_interaction_logprob = pr.at("no_interaction").get<double>();
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<HOITriple> hoi_infer(const std::string& image_id, const std::vector<HOICandidate>& candidates,
                                 const HOIInferOptions& options) {
  std::vector<HOITriple> out;
  for (const auto& c : candidates) {
    if (!(c.person_score > options.person_threshold)) continue;
    bool pruned;
    if (options.prune_threshold) {
      pruned = std::exp(c.no_interaction_logprob) > *options.prune_threshold;
    } else {
      pruned = true;
      for (const auto& [_, lp] : c.interaction_logprobs)
        if (lp >= c.no_interaction_logprob) pruned = false;
    }
    if (pruned) continue;
    for (const auto& [cls, lp] : c.interaction_logprobs) out.push_back({image_id, c.person, c.object, cls, lp});
  }
  std::stable_sort(out.begin(), out.end(), [](const HOITriple& a, const HOITriple& b) { return a.score > b.score; });
  return out;
}

}  // namespace conceptkit
