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

#include "conceptkit/dce_sampler.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "conceptkit/error.hpp"
#include "conceptkit/random.hpp"
#include "conceptkit/text.hpp"

namespace conceptkit {

namespace {

std::string box_key(const std::string& image_id, const std::string& category, const BoundingBox& b) {
  return hex64(keyed_hash(0, {image_id, category, to_json(b).dump()}));
}

std::vector<std::string> words(const std::string& text) {
  std::string cleaned = to_lower(text);
  for (char& c : cleaned)
    if (std::ispunct(static_cast<unsigned char>(c)) && c != '\'') c = ' ';
  return tokenize(cleaned);
}

bool parse_bool_field(const std::string& s, bool& out) {
  auto v = to_lower(trim(s));
  if (v == "1" || v == "true") return out = true, true;
  if (v == "0" || v == "false" || v.empty()) return out = false, true;
  return false;
}

}  // namespace

std::vector<CategoryNode> hierarchy_from_json(const json& j) {
  const json& arr = j.is_object() && j.contains("categories") ? j["categories"] : j;
  if (!arr.is_array()) throw ValidationError("hierarchy must be a JSON array of {name, parent}");
  std::vector<CategoryNode> out;
  for (const auto& n : arr) {
    CategoryNode c;
    c.name = n.at("name").get<std::string>();
    if (n.contains("parent") && !n["parent"].is_null()) c.parent = n["parent"].get<std::string>();
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<CategoryNode> load_hierarchy(const std::filesystem::path& path) {
  return hierarchy_from_json(read_json(path));
}

CategorySelection select_categories(std::vector<CategoryNode>& hierarchy,
                                    const std::set<std::string>& noisy_exclusions) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < hierarchy.size(); ++i) {
    if (hierarchy[i].name.empty()) throw ValidationError("category with empty name");
    if (!index.emplace(hierarchy[i].name, i).second)
      throw ValidationError("duplicate category '" + hierarchy[i].name + "'");
  }
  std::vector<bool> has_child(hierarchy.size(), false);
  for (const auto& n : hierarchy) {
    if (!n.parent) continue;
    auto it = index.find(*n.parent);
    if (it == index.end()) throw ValidationError("category '" + n.name + "' has unknown parent '" + *n.parent + "'");
    has_child[it->second] = true;
  }
  for (const auto& n : hierarchy) {
    // Walking up more than |hierarchy| steps means a cycle.
    const CategoryNode* cur = &n;
    for (std::size_t steps = 0; cur->parent; ++steps) {
      if (steps > hierarchy.size()) throw ValidationError("category hierarchy has a cycle through '" + n.name + "'");
      cur = &hierarchy[index.at(*cur->parent)];
    }
  }

  CategorySelection sel;
  for (std::size_t i = 0; i < hierarchy.size(); ++i) {
    auto& n = hierarchy[i];
    n.leaf = !has_child[i];
    n.excluded_noisy = noisy_exclusions.count(n.name) > 0;
    if (n.leaf && !n.excluded_noisy) sel.categories.push_back(n.name);
  }
  for (const auto& e : noisy_exclusions)
    if (!index.count(e)) sel.warnings.push_back("exclusion '" + e + "' is not in the hierarchy");
  std::sort(sel.categories.begin(), sel.categories.end());
  if (sel.categories.empty()) sel.warnings.push_back("no categories selected: every leaf is excluded");
  return sel;
}

std::vector<BoxAnnotation> load_box_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::vector<BoxAnnotation> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cols = split(line, ',');
    if (lineno == 1 && !cols.empty() && trim(cols[0]) == "image_id") continue;
    if (cols.size() != 7) throw ParseError(path.string(), lineno, "expected 7 comma-separated columns");
    BoxAnnotation a;
    a.image_id = trim(cols[0]);
    a.category = trim(cols[1]);
    try {
      a.box = make_box(std::stod(cols[2]), std::stod(cols[3]), std::stod(cols[4]), std::stod(cols[5]));
    } catch (const std::exception& e) {
      throw ParseError(path.string(), lineno, std::string("bad box: ") + e.what());
    }
    if (!parse_bool_field(cols[6], a.is_group)) throw ParseError(path.string(), lineno, "bad is_group value");
    out.push_back(std::move(a));
  }
  return out;
}

json to_json(const BoxSample& s) {
  return json{{"id", s.id}, {"image_id", s.image_id}, {"category", s.category}, {"box", to_json(s.box)}};
}

json to_json(const LocSample& s) {
  json boxes = json::array();
  for (const auto& b : s.boxes) boxes.push_back(to_json(b));
  return json{{"id", s.id}, {"image_id", s.image_id}, {"category", s.category}, {"boxes", boxes}};
}

std::vector<BoxSample> sample_cls_cic(const std::vector<BoxAnnotation>& annotations,
                                      const std::vector<std::string>& categories, std::size_t cap,
                                      std::uint64_t seed) {
  if (cap == 0) throw ValidationError("sampling cap must be positive");
  std::set<std::string> selected(categories.begin(), categories.end());
  std::map<std::string, std::map<std::string, BoxSample>> by_category;
  for (const auto& a : annotations) {
    if (!selected.count(a.category)) continue;
    BoxSample s{"box:" + box_key(a.image_id, a.category, a.box), a.image_id, a.category, a.box};
    by_category[a.category].emplace(s.id, s);
  }
  std::vector<BoxSample> out;
  for (auto& [cat, pool_map] : by_category) {
    std::vector<BoxSample> pool;
    for (auto& [_, s] : pool_map) pool.push_back(s);
    Rng rng = Rng::keyed(seed, {"cls", cat});
    std::vector<BoxSample> chosen;
    for (auto i : sample_indices(pool.size(), cap, rng)) chosen.push_back(pool[i]);
    std::sort(chosen.begin(), chosen.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    out.insert(out.end(), chosen.begin(), chosen.end());
  }
  return out;
}

std::vector<LocSample> sample_loc(const std::vector<BoxAnnotation>& annotations,
                                  const std::vector<std::string>& categories, std::size_t cap,
                                  std::uint64_t seed) {
  if (cap == 0) throw ValidationError("sampling cap must be positive");
  std::set<std::string> selected(categories.begin(), categories.end());
  std::map<std::string, std::map<std::string, LocSample>> by_category;
  for (const auto& a : annotations) {
    if (a.is_group || !selected.count(a.category)) continue;
    auto& s = by_category[a.category][a.image_id];
    if (s.id.empty()) {
      s.id = "loc:" + a.category + ":" + a.image_id;
      s.image_id = a.image_id;
      s.category = a.category;
    }
    s.boxes.push_back(a.box);
  }
  std::vector<LocSample> out;
  for (auto& [cat, per_image] : by_category) {
    std::vector<LocSample> pool;
    for (auto& [_, s] : per_image) pool.push_back(s);
    Rng rng = Rng::keyed(seed, {"loc", cat});
    std::vector<LocSample> chosen;
    for (auto i : sample_indices(pool.size(), cap, rng)) chosen.push_back(pool[i]);
    std::sort(chosen.begin(), chosen.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    out.insert(out.end(), chosen.begin(), chosen.end());
  }
  return out;
}

VQAAnnotation vqa_from_json(const json& j) {
  VQAAnnotation a;
  a.question_id = j.at("question_id").is_string() ? j["question_id"].get<std::string>()
                                                  : std::to_string(j["question_id"].get<long long>());
  a.image_id = j.at("image_id").is_string() ? j["image_id"].get<std::string>()
                                            : std::to_string(j["image_id"].get<long long>());
  a.question = j.at("question").get<std::string>();
  a.answer = j.at("answer").get<std::string>();
  if (j.contains("extra_answers")) a.extra_answers = j["extra_answers"].get<std::vector<std::string>>();
  if (j.contains("categories")) {
    auto c = j["categories"].get<std::vector<std::string>>();
    a.tagged_categories = {c.begin(), c.end()};
  }
  if (a.extra_answers.size() > 9) throw ValidationError("question " + a.question_id + " has more than 9 extra answers");
  return a;
}

json to_json(const VQAAnnotation& a) {
  return json{{"question_id", a.question_id},
              {"image_id", a.image_id},
              {"question", a.question},
              {"answer", a.answer},
              {"categories", std::vector<std::string>(a.tagged_categories.begin(), a.tagged_categories.end())},
              {"extra_answers", a.extra_answers}};
}

std::vector<VQAAnnotation> filter_vqa_answers(std::vector<VQAAnnotation> anns, std::size_t max_words) {
  std::erase_if(anns, [&](const VQAAnnotation& a) { return answer_word_count(a.answer) > max_words; });
  return anns;
}

bool mentions_category(const std::string& text, const std::string& category) {
  auto cat = words(category);
  auto toks = words(text);
  if (cat.empty() || toks.size() < cat.size()) return false;
  for (std::size_t i = 0; i + cat.size() <= toks.size(); ++i) {
    bool ok = true;
    for (std::size_t k = 0; k < cat.size() && ok; ++k) {
      const auto& t = toks[i + k];
      const auto& c = cat[k];
      if (k + 1 < cat.size()) {
        ok = t == c;
      } else {
        ok = t == c || t == c + "s" || t == c + "es";
      }
    }
    if (ok) return true;
  }
  return false;
}

void tag_vqa(std::vector<VQAAnnotation>& anns, const std::vector<std::string>& categories) {
  for (auto& a : anns) {
    a.tagged_categories.clear();
    for (const auto& c : categories)
      if (mentions_category(a.question, c) || mentions_category(a.answer, c)) a.tagged_categories.insert(c);
  }
}

std::vector<std::string> vqa_category_order(const std::vector<VQAAnnotation>& anns,
                                            const std::vector<std::string>& categories) {
  std::map<std::string, std::size_t> avail;
  for (const auto& c : categories) avail[c] = 0;
  for (const auto& a : anns)
    for (const auto& c : a.tagged_categories)
      if (avail.count(c)) ++avail[c];
  std::vector<std::string> order;
  for (auto& [c, _] : avail) order.push_back(c);
  std::stable_sort(order.begin(), order.end(),
                   [&](const std::string& a, const std::string& b) { return avail[a] > avail[b]; });
  return order;
}

VQASampling sample_vqa(const std::vector<VQAAnnotation>& anns, const std::vector<std::string>& categories,
                       std::size_t cap, std::uint64_t seed) {
  VQASampling out;
  std::vector<bool> taken(anns.size(), false);
  for (const auto& cat : vqa_category_order(anns, categories)) {
    VQADrawTrace t{cat, 0, 0, 0};
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < anns.size(); ++i) {
      if (!anns[i].tagged_categories.count(cat)) continue;
      ++t.available;
      if (taken[i]) {
        ++t.already;
      } else {
        pool.push_back(i);
      }
    }
    const std::size_t need = t.already >= cap ? 0 : cap - t.already;
    Rng rng = Rng::keyed(seed, {"vqa", cat});
    for (auto k : sample_indices(pool.size(), need, rng)) {
      taken[pool[k]] = true;
      out.selected.push_back(pool[k]);
      ++t.drawn;
    }
    out.trace.push_back(t);
  }
  return out;
}

VQAAggregate aggregate_vqa_answers(const std::string& original, const std::vector<std::string>& extras,
                                   std::size_t min_agreement) {
  if (extras.size() != 9)
    throw ValidationError("expected 9 extra answers, got " + std::to_string(extras.size()));
  VQAAggregate agg;
  agg.references.push_back(original);
  agg.references.insert(agg.references.end(), extras.begin(), extras.end());
  std::map<std::string, std::size_t> counts;
  for (const auto& r : agg.references) ++counts[normalize_answer(r)];
  for (const auto& [ans, n] : counts) {
    if (n > agg.consensus_count) {
      agg.consensus = ans;
      agg.consensus_count = n;
    }
  }
  agg.retained = agg.consensus_count >= min_agreement;
  return agg;
}

}  // namespace conceptkit
