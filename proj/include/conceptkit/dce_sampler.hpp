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
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "conceptkit/geometry.hpp"
#include "conceptkit/jsonl.hpp"

namespace conceptkit {

struct CategoryNode {
  std::string name;
  std::optional<std::string> parent;
  bool leaf = false;
  bool excluded_noisy = false;
};

// JSON array of {"name", "parent"} objects (parent null or absent for roots).
std::vector<CategoryNode> load_hierarchy(const std::filesystem::path& path);
std::vector<CategoryNode> hierarchy_from_json(const json& j);

struct CategorySelection {
  std::vector<std::string> categories;  // sorted
  std::vector<std::string> warnings;
};

// Leaves of the hierarchy minus the noisy exclusions. Fills `leaf` and
// `excluded_noisy` on the nodes. Throws ValidationError on duplicate names,
// unknown parents or cycles.
CategorySelection select_categories(std::vector<CategoryNode>& hierarchy,
                                    const std::set<std::string>& noisy_exclusions);

struct BoxAnnotation {
  std::string image_id;
  std::string category;
  BoundingBox box;
  bool is_group = false;
};

// CSV with columns image_id,category,x1,y1,x2,y2,is_group and an optional
// header row. is_group accepts 0/1/true/false.
std::vector<BoxAnnotation> load_box_annotations(const std::filesystem::path& path);

// A single annotated box (classification and classification-in-context).
struct BoxSample {
  std::string id;
  std::string image_id;
  std::string category;
  BoundingBox box;

  bool operator==(const BoxSample&) const = default;
};

// Every box of one category in one image, group boxes excluded.
struct LocSample {
  std::string id;
  std::string image_id;
  std::string category;
  std::vector<BoundingBox> boxes;

  bool operator==(const LocSample&) const = default;
};

json to_json(const BoxSample& s);
json to_json(const LocSample& s);

// Per selected category, min(cap, available) boxes drawn uniformly without
// replacement. Output is sorted by (category, id).
std::vector<BoxSample> sample_cls_cic(const std::vector<BoxAnnotation>& annotations,
                                      const std::vector<std::string>& categories, std::size_t cap,
                                      std::uint64_t seed);

// Per selected category, up to `cap` (image, category) samples, each holding
// all of that category's non-group boxes in the image.
std::vector<LocSample> sample_loc(const std::vector<BoxAnnotation>& annotations,
                                  const std::vector<std::string>& categories, std::size_t cap,
                                  std::uint64_t seed);

struct VQAAnnotation {
  std::string question_id;
  std::string image_id;
  std::string question;
  std::string answer;
  std::set<std::string> tagged_categories;
  std::vector<std::string> extra_answers;  // at most 9
};

VQAAnnotation vqa_from_json(const json& j);
json to_json(const VQAAnnotation& a);

// Drops annotations whose answer has more than `max_words` words once
// articles are removed.
std::vector<VQAAnnotation> filter_vqa_answers(std::vector<VQAAnnotation> anns, std::size_t max_words = 2);

// True if the category name occurs as whole words in `text` (case-insensitive,
// punctuation ignored). The last word may carry a plural "s" or "es".
bool mentions_category(const std::string& text, const std::string& category);

// Sets tagged_categories to the categories mentioned in question or answer.
void tag_vqa(std::vector<VQAAnnotation>& anns, const std::vector<std::string>& categories);

// Categories sorted by descending number of tagged annotations, then name.
std::vector<std::string> vqa_category_order(const std::vector<VQAAnnotation>& anns,
                                            const std::vector<std::string>& categories);

struct VQADrawTrace {
  std::string category;
  std::size_t available = 0;  // annotations tagged with the category
  std::size_t already = 0;    // k: sampled earlier through co-occurrence
  std::size_t drawn = 0;
};

struct VQASampling {
  std::vector<std::size_t> selected;  // indices into the input, in draw order
  std::vector<VQADrawTrace> trace;    // one entry per category, in visit order
};

// Visits categories in vqa_category_order. For a category that already has k
// sampled annotations, draws max(0, cap - k) more uniformly from its
// not-yet-selected annotations.
VQASampling sample_vqa(const std::vector<VQAAnnotation>& anns, const std::vector<std::string>& categories,
                       std::size_t cap, std::uint64_t seed);

struct VQAAggregate {
  bool retained = false;
  std::vector<std::string> references;  // original answer followed by the extras
  std::string consensus;                // most frequent normalized answer
  std::size_t consensus_count = 0;
};

// Requires exactly 9 extra answers. Retained iff some normalized answer is
// given at least `min_agreement` times among the 10.
VQAAggregate aggregate_vqa_answers(const std::string& original, const std::vector<std::string>& extras,
                                   std::size_t min_agreement = 3);

}  // namespace conceptkit
