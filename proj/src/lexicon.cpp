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

#include "conceptkit/lexicon.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "conceptkit/error.hpp"
#include "conceptkit/text.hpp"

namespace conceptkit {

namespace {

std::ifstream open_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return in;
}

void sort_unique(std::vector<Concept>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::vector<std::string> collect_sources(const std::vector<std::vector<std::string>>& sources,
                                         const std::set<std::string>& exclusions) {
  std::set<std::string> excluded;
  for (const auto& e : exclusions) excluded.insert(to_lower(trim(e)));
  std::set<std::string> out;
  for (const auto& list : sources) {
    for (const auto& w : list) {
      auto word = to_lower(trim(w));
      if (word.empty() || excluded.count(word)) continue;
      out.insert(word);
    }
  }
  return {out.begin(), out.end()};
}

}  // namespace

std::string to_string(PartOfSpeech pos) {
  switch (pos) {
    case PartOfSpeech::noun: return "noun";
    case PartOfSpeech::verb: return "verb";
    case PartOfSpeech::adjective: return "adjective";
  }
  return "noun";
}

PartOfSpeech parse_pos(const std::string& s) {
  if (s == "noun") return PartOfSpeech::noun;
  if (s == "verb") return PartOfSpeech::verb;
  if (s == "adjective") return PartOfSpeech::adjective;
  throw ValidationError("unknown part of speech '" + s + "'");
}

void Concept::validate() const {
  if (surface.empty()) throw ValidationError("concept with empty surface");
  if (pos == PartOfSpeech::adjective && !adj_type)
    throw ValidationError("adjective '" + surface + "' has no adjective type");
  if (concreteness && (*concreteness < 0.0 || *concreteness > 5.0))
    throw ValidationError("concept '" + surface + "' has concreteness outside [0,5]");
}

Concept make_concept(std::string surface, PartOfSpeech pos) {
  Concept c;
  c.surface = to_lower(trim(surface));
  c.pos = pos;
  c.multiword = tokenize(c.surface).size() > 1;
  return c;
}

json to_json(const Concept& c) {
  json j{{"surface", c.surface}, {"pos", to_string(c.pos)}, {"multiword", c.multiword}};
  j["concreteness"] = c.concreteness ? json(*c.concreteness) : json(nullptr);
  j["adj_type"] = c.adj_type ? json(*c.adj_type) : json(nullptr);
  return j;
}

Concept concept_from_json(const json& j) {
  Concept c;
  c.surface = j.at("surface").get<std::string>();
  c.pos = parse_pos(j.at("pos").get<std::string>());
  c.multiword = j.value("multiword", false);
  if (j.contains("concreteness") && !j["concreteness"].is_null())
    c.concreteness = j["concreteness"].get<double>();
  if (j.contains("adj_type") && !j["adj_type"].is_null())
    c.adj_type = j["adj_type"].get<std::string>();
  c.validate();
  return c;
}

json to_json(const ConceptLexicon& lex) {
  auto arr = [](const std::vector<Concept>& v) {
    json a = json::array();
    for (const auto& c : v) a.push_back(to_json(c));
    return a;
  };
  return json{{"nouns", arr(lex.nouns)}, {"verbs", arr(lex.verbs)}, {"adjectives", arr(lex.adjectives)}};
}

ConceptLexicon lexicon_from_json(const json& j) {
  auto arr = [](const json& a) {
    std::vector<Concept> v;
    for (const auto& c : a) v.push_back(concept_from_json(c));
    return v;
  };
  return make_lexicon(arr(j.at("nouns")), arr(j.at("verbs")), arr(j.at("adjectives")));
}

ConcretenessTable load_concreteness(const std::filesystem::path& path) {
  auto in = open_text(path);
  ConcretenessTable table;
  std::vector<std::string> problems;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cols = split(line, '\t');
    if (lineno == 1 && !cols.empty() && to_lower(trim(cols[0])) == "word") continue;
    auto report = [&](const std::string& msg) {
      problems.push_back("line " + std::to_string(lineno) + ": " + msg);
    };
    if (cols.size() < 3) {
      report("expected 3 tab-separated columns");
      continue;
    }
    auto score = parse_double(trim(cols[1]));
    if (!score) {
      report("non-numeric score '" + cols[1] + "'");
      continue;
    }
    if (*score < 0.0 || *score > 5.0) {
      report("score " + cols[1] + " outside [0,5]");
      continue;
    }
    ConcretenessCandidate c;
    c.word = to_lower(trim(cols[0]));
    c.score = *score;
    bool bad_flag = false;
    for (char f : trim(cols[2])) {
      if (f == 'N') c.plain_noun = true;
      else if (f == 'A') c.alt_sense = true;
      else bad_flag = true;
    }
    if (c.word.empty()) {
      report("empty word");
      continue;
    }
    if (bad_flag || (!c.plain_noun && !c.alt_sense)) {
      report("flags must combine N and A, got '" + cols[2] + "'");
      continue;
    }
    table.rows.push_back(std::move(c));
  }
  if (!problems.empty()) {
    throw ValidationError("malformed concreteness rows in '" + path.string() + "':\n  " +
                          join(problems, "\n  "));
  }
  if (table.rows.empty()) table.warnings.push_back("concreteness table '" + path.string() + "' is empty");
  return table;
}

std::vector<Concept> select_nouns(const std::vector<ConcretenessCandidate>& candidates,
                                  double threshold_primary, double threshold_alt_sense) {
  if (threshold_primary < 0 || threshold_primary > 5 || threshold_alt_sense < 0 ||
      threshold_alt_sense > 5)
    throw ValidationError("concreteness thresholds must lie in [0,5]");
  std::vector<Concept> out;
  for (const auto& c : candidates) {
    bool keep = (c.plain_noun && c.score > threshold_primary) ||
                (c.alt_sense && c.score > threshold_alt_sense);
    if (!keep) continue;
    Concept n = make_concept(c.word, PartOfSpeech::noun);
    n.concreteness = c.score;
    out.push_back(std::move(n));
  }
  sort_unique(out);
  return out;
}

std::vector<Concept> select_multiword_nouns(std::vector<PhraseFrequency> candidates,
                                            const std::set<std::string>& concrete_words,
                                            int top_k, int extra_rule_cap) {
  if (top_k < 0) throw ValidationError("top_k must be nonnegative");
  if (extra_rule_cap < 0) throw ValidationError("extra_rule_cap must be nonnegative");

  std::map<std::string, std::uint64_t> merged;
  for (auto& c : candidates) {
    auto phrase = join(tokenize(to_lower(c.phrase)), " ");
    if (!phrase.empty()) merged[phrase] += c.frequency;
  }
  std::vector<PhraseFrequency> ranked;
  for (auto& [p, f] : merged) ranked.push_back({p, f});
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.frequency != b.frequency) return a.frequency > b.frequency;
    return a.phrase < b.phrase;
  });

  std::vector<Concept> out;
  std::size_t i = 0;
  for (; i < ranked.size() && out.size() < static_cast<std::size_t>(top_k); ++i)
    out.push_back(make_concept(ranked[i].phrase, PartOfSpeech::noun));

  int extra = 0;
  for (; i < ranked.size() && extra < extra_rule_cap; ++i) {
    auto toks = tokenize(ranked[i].phrase);
    if (toks.size() < 2 || !concrete_words.count(toks.back())) continue;
    out.push_back(make_concept(ranked[i].phrase, PartOfSpeech::noun));
    ++extra;
  }
  sort_unique(out);
  return out;
}

std::vector<Concept> select_verbs(const std::vector<std::vector<std::string>>& source_lists,
                                  const std::set<std::string>& exclusions) {
  std::vector<Concept> out;
  for (auto& w : collect_sources(source_lists, exclusions))
    out.push_back(make_concept(w, PartOfSpeech::verb));
  return out;
}

std::vector<Concept> select_adjectives(const std::vector<std::vector<std::string>>& source_lists,
                                       const std::set<std::string>& exclusions,
                                       const std::map<std::string, std::string>& type_map) {
  std::vector<Concept> out;
  std::vector<std::string> unmapped;
  for (auto& w : collect_sources(source_lists, exclusions)) {
    auto it = type_map.find(w);
    if (it == type_map.end()) {
      unmapped.push_back(w);
      continue;
    }
    Concept c = make_concept(w, PartOfSpeech::adjective);
    c.adj_type = it->second;
    out.push_back(std::move(c));
  }
  if (!unmapped.empty())
    throw ValidationError("adjectives missing from the type map: " + join(unmapped, ", "));
  return out;
}

std::set<std::string> load_word_set(const std::filesystem::path& path) {
  std::set<std::string> out;
  for (auto& l : read_lines(path)) out.insert(to_lower(l));
  return out;
}

std::map<std::string, std::string> load_adjective_types(const std::filesystem::path& path) {
  auto in = open_text(path);
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || trim(line)[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 2 || trim(cols[0]).empty() || trim(cols[1]).empty())
      throw ParseError(path.string(), lineno, "expected `adjective<TAB>type`");
    out[to_lower(trim(cols[0]))] = to_lower(trim(cols[1]));
  }
  return out;
}

std::vector<PhraseFrequency> load_phrase_frequencies(const std::filesystem::path& path) {
  auto in = open_text(path);
  std::vector<PhraseFrequency> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || trim(line)[0] == '#') continue;
    auto cols = split(line, '\t');
    std::uint64_t f = 0;
    if (cols.size() != 2) throw ParseError(path.string(), lineno, "expected `phrase<TAB>frequency`");
    auto t = trim(cols[1]);
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), f);
    if (ec != std::errc() || ptr != t.data() + t.size())
      throw ParseError(path.string(), lineno, "non-integer frequency '" + cols[1] + "'");
    out.push_back({trim(cols[0]), f});
  }
  return out;
}

bool is_blacklisted(const std::string& surface, const std::set<std::string>& blacklist) {
  if (blacklist.empty()) return false;
  if (blacklist.count(to_lower(surface))) return true;
  for (const auto& tok : tokenize(to_lower(surface)))
    if (blacklist.count(tok)) return true;
  return false;
}

std::size_t apply_blacklist(ConceptLexicon& lex, const std::set<std::string>& blacklist) {
  std::size_t removed = 0;
  for (auto* v : {&lex.nouns, &lex.verbs, &lex.adjectives}) {
    auto before = v->size();
    std::erase_if(*v, [&](const Concept& c) { return is_blacklisted(c.surface, blacklist); });
    removed += before - v->size();
  }
  return removed;
}

ConceptLexicon make_lexicon(std::vector<Concept> nouns, std::vector<Concept> verbs,
                            std::vector<Concept> adjectives) {
  ConceptLexicon lex{std::move(nouns), std::move(verbs), std::move(adjectives)};
  sort_unique(lex.nouns);
  sort_unique(lex.verbs);
  sort_unique(lex.adjectives);
  return lex;
}

void validate_lexicon(const ConceptLexicon& lex, const std::set<std::string>& blacklist) {
  auto check = [&](const std::vector<Concept>& v, PartOfSpeech pos) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i].validate();
      if (v[i].pos != pos)
        throw ValidationError("concept '" + v[i].surface + "' filed under the wrong part of speech");
      if (i > 0 && !(v[i - 1] < v[i]))
        throw ValidationError("duplicate or unsorted concept '" + v[i].surface + "'");
      if (is_blacklisted(v[i].surface, blacklist))
        throw ValidationError("blacklisted concept '" + v[i].surface + "'");
    }
  };
  check(lex.nouns, PartOfSpeech::noun);
  check(lex.verbs, PartOfSpeech::verb);
  check(lex.adjectives, PartOfSpeech::adjective);
}

std::string to_string(QueryKind k) {
  switch (k) {
    case QueryKind::noun: return "noun";
    case QueryKind::noun_adjective: return "noun_adjective";
    case QueryKind::noun_verb: return "noun_verb";
  }
  return "noun";
}

QueryKind PairQuery::kind() const {
  if (!modifier) return QueryKind::noun;
  return modifier->pos == PartOfSpeech::verb ? QueryKind::noun_verb : QueryKind::noun_adjective;
}

std::string PairQuery::id() const {
  switch (kind()) {
    case QueryKind::noun: return "n:" + noun.surface;
    case QueryKind::noun_adjective: return "a:" + modifier->surface + ":" + noun.surface;
    case QueryKind::noun_verb: return "v:" + noun.surface + ":" + modifier->surface;
  }
  return {};
}

PairQuery make_noun_query(const Concept& noun, std::uint64_t corpus_count) {
  PairQuery q;
  q.noun = noun;
  q.query_text = noun.surface;
  q.corpus_count = corpus_count;
  return q;
}

PairQuery make_pair_query(const Concept& noun, const Concept& modifier, std::uint64_t corpus_count) {
  if (modifier.pos == PartOfSpeech::noun)
    throw ValidationError("pair modifier '" + modifier.surface + "' must be a verb or adjective");
  PairQuery q;
  q.noun = noun;
  q.modifier = modifier;
  q.query_text = modifier.pos == PartOfSpeech::adjective ? modifier.surface + " " + noun.surface
                                                         : noun.surface + " " + modifier.surface;
  q.corpus_count = corpus_count;
  return q;
}

json to_json(const PairQuery& q) {
  return json{{"id", q.id()},
              {"kind", to_string(q.kind())},
              {"query_text", q.query_text},
              {"noun", to_json(q.noun)},
              {"modifier", q.modifier ? to_json(*q.modifier) : json(nullptr)},
              {"corpus_count", q.corpus_count}};
}

PairQuery query_from_json(const json& j) {
  Concept noun = concept_from_json(j.at("noun"));
  std::uint64_t count = j.value("corpus_count", std::uint64_t{0});
  PairQuery q = (j.contains("modifier") && !j["modifier"].is_null())
                    ? make_pair_query(noun, concept_from_json(j["modifier"]), count)
                    : make_noun_query(noun, count);
  if (j.contains("query_text") && j["query_text"].get<std::string>() != q.query_text)
    throw ValidationError("query_text '" + j["query_text"].get<std::string>() +
                          "' does not match its concepts");
  return q;
}

std::vector<std::string> load_corpus(const std::filesystem::path& path) {
  auto in = open_text(path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (!t.empty()) out.push_back(to_lower(t));
  }
  return out;
}

namespace {

using Counts = std::unordered_map<std::string, std::uint64_t>;

template <typename Fn>
Counts parallel_count(const std::vector<std::string>& captions, unsigned threads, Fn&& per_caption) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(captions.size() / 1024 + 1)));
  std::vector<Counts> partial(threads);
  std::vector<std::thread> pool;
  const std::size_t chunk = (captions.size() + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      std::size_t b = t * chunk;
      std::size_t e = std::min(captions.size(), b + chunk);
      for (std::size_t i = b; i < e; ++i) per_caption(tokenize(captions[i]), partial[t]);
    });
  }
  for (auto& th : pool) th.join();
  Counts total;
  for (auto& p : partial)
    for (auto& [k, v] : p) total[k] += v;
  return total;
}

std::string span_text(const std::vector<std::string>& toks, std::size_t b, std::size_t n) {
  std::string s = toks[b];
  for (std::size_t i = b + 1; i < b + n; ++i) {
    s += ' ';
    s += toks[i];
  }
  return s;
}

struct PhraseIndex {
  std::unordered_set<std::string> phrases;
  std::size_t max_len = 0;

  template <typename Range>
  explicit PhraseIndex(const Range& surfaces) {
    for (const auto& s : surfaces) {
      phrases.insert(s);
      max_len = std::max(max_len, tokenize(s).size());
    }
  }

  // Lengths n such that toks[b, b+n) is an indexed phrase.
  std::vector<std::size_t> matches_at(const std::vector<std::string>& toks, std::size_t b) const {
    std::vector<std::size_t> out;
    for (std::size_t n = 1; n <= max_len && b + n <= toks.size(); ++n)
      if (phrases.count(span_text(toks, b, n))) out.push_back(n);
    return out;
  }
};

}  // namespace

std::map<std::string, std::uint64_t> count_phrases(const std::vector<std::string>& captions,
                                                   const std::set<std::string>& phrases,
                                                   unsigned threads) {
  PhraseIndex index(phrases);
  auto counts = parallel_count(captions, threads, [&](const std::vector<std::string>& toks, Counts& c) {
    for (std::size_t i = 0; i < toks.size(); ++i)
      for (auto n : index.matches_at(toks, i)) ++c[span_text(toks, i, n)];
  });
  std::map<std::string, std::uint64_t> out;
  for (const auto& p : phrases) {
    auto it = counts.find(p);
    out[p] = it == counts.end() ? 0 : it->second;
  }
  return out;
}

std::vector<PairQuery> build_pair_queries(const std::vector<Concept>& nouns,
                                          const std::vector<Concept>& adjectives,
                                          const std::vector<Concept>& verbs,
                                          const std::vector<std::string>& captions,
                                          std::uint64_t min_count, unsigned threads) {
  std::map<std::string, const Concept*> noun_by, adj_by, verb_by;
  for (const auto& c : nouns) noun_by[c.surface] = &c;
  for (const auto& c : adjectives) adj_by[c.surface] = &c;
  for (const auto& c : verbs) verb_by[c.surface] = &c;
  auto keys = [](const auto& m) {
    std::vector<std::string> k;
    for (const auto& [s, _] : m) k.push_back(s);
    return k;
  };
  PhraseIndex noun_idx(keys(noun_by)), adj_idx(keys(adj_by)), verb_idx(keys(verb_by));

  // Keys: "n\t<noun>", "a\t<adj>\t<noun>", "v\t<noun>\t<verb>".
  auto counts = parallel_count(captions, threads, [&](const std::vector<std::string>& toks, Counts& c) {
    for (std::size_t i = 0; i < toks.size(); ++i) {
      for (auto ln : noun_idx.matches_at(toks, i)) {
        auto noun = span_text(toks, i, ln);
        ++c["n\t" + noun];
        for (auto lv : verb_idx.matches_at(toks, i + ln))
          ++c["v\t" + noun + "\t" + span_text(toks, i + ln, lv)];
      }
      for (auto la : adj_idx.matches_at(toks, i))
        for (auto ln : noun_idx.matches_at(toks, i + la))
          ++c["a\t" + span_text(toks, i, la) + "\t" + span_text(toks, i + la, ln)];
    }
  });

  std::vector<PairQuery> out;
  for (const auto& [surface, noun] : noun_by) {
    auto it = counts.find("n\t" + surface);
    out.push_back(make_noun_query(*noun, it == counts.end() ? 0 : it->second));
  }
  for (const auto& [key, count] : counts) {
    if (count < min_count) continue;
    auto parts = split(key, '\t');
    if (parts[0] == "a") {
      out.push_back(make_pair_query(*noun_by.at(parts[2]), *adj_by.at(parts[1]), count));
    } else if (parts[0] == "v") {
      out.push_back(make_pair_query(*noun_by.at(parts[1]), *verb_by.at(parts[2]), count));
    }
  }
  std::sort(out.begin(), out.end(), [](const PairQuery& a, const PairQuery& b) { return a.id() < b.id(); });
  return out;
}

std::vector<PairQuery> queries_from_terms(const std::vector<std::string>& terms) {
  std::map<std::string, PairQuery> by_id;
  for (const auto& t : terms) {
    auto c = make_concept(t, PartOfSpeech::noun);
    if (c.surface.empty()) continue;
    auto q = make_noun_query(c);
    by_id.emplace(q.id(), q);
  }
  std::vector<PairQuery> out;
  for (auto& [_, q] : by_id) out.push_back(std::move(q));
  return out;
}

}  // namespace conceptkit
