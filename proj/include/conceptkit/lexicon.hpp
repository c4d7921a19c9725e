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
#include <set>
#include <string>
#include <vector>

#include "conceptkit/jsonl.hpp"

namespace conceptkit {

enum class PartOfSpeech { noun, verb, adjective };

std::string to_string(PartOfSpeech pos);
PartOfSpeech parse_pos(const std::string& s);

struct Concept {
  std::string surface;  // lowercased
  PartOfSpeech pos = PartOfSpeech::noun;
  std::optional<double> concreteness;
  bool multiword = false;
  std::optional<std::string> adj_type;  // adjectives only

  // Throws ValidationError if surface is empty, an adjective lacks a type, or
  // concreteness is outside [0, 5].
  void validate() const;

  auto operator<=>(const Concept& o) const {
    if (auto c = surface <=> o.surface; c != 0) return c;
    return pos <=> o.pos;
  }
  bool operator==(const Concept& o) const { return surface == o.surface && pos == o.pos; }
};

Concept make_concept(std::string surface, PartOfSpeech pos);

json to_json(const Concept& c);
Concept concept_from_json(const json& j);

// Each vector is kept sorted by surface and free of duplicates.
struct ConceptLexicon {
  std::vector<Concept> nouns;
  std::vector<Concept> verbs;
  std::vector<Concept> adjectives;

  std::size_t size() const { return nouns.size() + verbs.size() + adjectives.size(); }
};

json to_json(const ConceptLexicon& lex);
ConceptLexicon lexicon_from_json(const json& j);

// One row of the concreteness norms table.
struct ConcretenessCandidate {
  std::string word;
  double score = 0.0;
  bool plain_noun = false;
  bool alt_sense = false;  // verb/adjective that also has a noun sense
};

struct ConcretenessTable {
  std::vector<ConcretenessCandidate> rows;
  std::vector<std::string> warnings;
};

// TSV rows `word<TAB>score<TAB>flags` where flags combine N (plain noun) and
// A (alternate noun sense). An optional header row starting with "word" is
// skipped. All malformed rows are collected and reported together, each with
// its line number.
ConcretenessTable load_concreteness(const std::filesystem::path& path);

std::vector<Concept> select_nouns(const std::vector<ConcretenessCandidate>& candidates,
                                  double threshold_primary = 4.0,
                                  double threshold_alt_sense = 4.5);

struct PhraseFrequency {
  std::string phrase;
  std::uint64_t frequency = 0;
};

// Most frequent `top_k` phrases, then up to `extra_rule_cap` of the remaining
// phrases whose last word is a concrete word. Ties in frequency are broken
// lexicographically. Phrases repeated in the input have their counts summed.
std::vector<Concept> select_multiword_nouns(std::vector<PhraseFrequency> candidates,
                                            const std::set<std::string>& concrete_words,
                                            int top_k = 2000, int extra_rule_cap = 282);

std::vector<Concept> select_verbs(const std::vector<std::vector<std::string>>& source_lists,
                                  const std::set<std::string>& exclusions);

std::vector<Concept> select_adjectives(const std::vector<std::vector<std::string>>& source_lists,
                                       const std::set<std::string>& exclusions,
                                       const std::map<std::string, std::string>& type_map);

// Lowercased word set, one per line.
std::set<std::string> load_word_set(const std::filesystem::path& path);

// TSV `adjective<TAB>type`.
std::map<std::string, std::string> load_adjective_types(const std::filesystem::path& path);

// TSV `phrase<TAB>frequency`.
std::vector<PhraseFrequency> load_phrase_frequencies(const std::filesystem::path& path);

// True if any token of `surface` is blacklisted.
bool is_blacklisted(const std::string& surface, const std::set<std::string>& blacklist);

// Drops every blacklisted concept and returns how many were removed.
std::size_t apply_blacklist(ConceptLexicon& lex, const std::set<std::string>& blacklist);

ConceptLexicon make_lexicon(std::vector<Concept> nouns, std::vector<Concept> verbs,
                            std::vector<Concept> adjectives);

// Checks every lexicon invariant; throws ValidationError naming the first
// offending concept.
void validate_lexicon(const ConceptLexicon& lex, const std::set<std::string>& blacklist);

enum class QueryKind { noun, noun_adjective, noun_verb };

std::string to_string(QueryKind k);

struct PairQuery {
  Concept noun;
  std::optional<Concept> modifier;
  std::string query_text;
  std::uint64_t corpus_count = 0;

  QueryKind kind() const;
  // Stable identifier: "n:dog", "a:brown:dog", "v:dog:running".
  std::string id() const;
};

PairQuery make_noun_query(const Concept& noun, std::uint64_t corpus_count = 0);
PairQuery make_pair_query(const Concept& noun, const Concept& modifier, std::uint64_t corpus_count);

json to_json(const PairQuery& q);
PairQuery query_from_json(const json& j);

// Captions, lowercased, one per line. Blank lines are kept out.
std::vector<std::string> load_corpus(const std::filesystem::path& path);

// Counts of every occurrence of each phrase as a run of consecutive tokens in
// the whitespace-tokenized captions. Counting is split across `threads`
// workers and merged by summation, so the result does not depend on it.
std::map<std::string, std::uint64_t> count_phrases(const std::vector<std::string>& captions,
                                                   const std::set<std::string>& phrases,
                                                   unsigned threads = 1);

// One bare query per noun plus every "adj noun" / "noun verb" phrase that
// occurs at least `min_count` times. Output is sorted by id().
std::vector<PairQuery> build_pair_queries(const std::vector<Concept>& nouns,
                                          const std::vector<Concept>& adjectives,
                                          const std::vector<Concept>& verbs,
                                          const std::vector<std::string>& captions,
                                          std::uint64_t min_count = 3, unsigned threads = 1);

// Bare queries for free-form terms, e.g. newly coined concepts.
std::vector<PairQuery> queries_from_terms(const std::vector<std::string>& terms);

}  // namespace conceptkit
