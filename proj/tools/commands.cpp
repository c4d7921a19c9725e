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

#include "commands.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "conceptkit/cider.hpp"
#include "conceptkit/dce_sampler.hpp"
#include "conceptkit/error.hpp"
#include "conceptkit/hoi.hpp"
#include "conceptkit/lexicon.hpp"
#include "conceptkit/metrics.hpp"
#include "conceptkit/predictions.hpp"
#include "conceptkit/random.hpp"
#include "conceptkit/scoring.hpp"
#include "conceptkit/search_ingest.hpp"
#include "conceptkit/splits.hpp"
#include "conceptkit/templating.hpp"
#include "conceptkit/text.hpp"

namespace conceptkit::cli {

namespace fs = std::filesystem;

namespace {

void log(const std::string& msg) { std::cerr << "conceptkit: " << msg << '\n'; }

ArtifactHeader header_for(const CLI::App& sub, std::uint64_t seed) {
  return ArtifactHeader{sub.get_name(), hex64(fnv1a64(sub.config_to_str(true, false))), seed};
}

json with_header(json j, const ArtifactHeader& h) {
  j[kHeaderKey] = h.to_json();
  return j;
}

std::vector<PairQuery> read_queries(const fs::path& path) {
  std::vector<PairQuery> out;
  for_each_jsonl(path, [&](const json& j, std::size_t line) {
    try {
      out.push_back(query_from_json(j));
    } catch (const std::exception& e) {
      throw ParseError(path.string(), line, e.what());
    }
  });
  return out;
}

std::vector<QAExample> read_qas(const fs::path& path) {
  std::vector<QAExample> out;
  for_each_jsonl(path, [&](const json& j, std::size_t line) {
    try {
      out.push_back(qa_from_json(j));
    } catch (const std::exception& e) {
      throw ParseError(path.string(), line, e.what());
    }
  });
  return out;
}

std::vector<std::string> as_vector(const std::set<std::string>& s) { return {s.begin(), s.end()}; }

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

std::pair<std::string, std::string> split_assignment(const std::string& s, const std::string& flag) {
  auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw ValidationError(flag + " expects NAME=VALUE, got '" + s + "'");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

std::vector<double> parse_grid(const std::string& spec) {
  auto parts = split(spec, ':');
  if (parts.size() != 3) throw ValidationError("--grid expects start:stop:step");
  double start = std::stod(parts[0]), stop = std::stod(parts[1]), step = std::stod(parts[2]);
  if (!(step > 0) || stop < start) throw ValidationError("--grid needs step > 0 and stop >= start");
  std::vector<double> grid;
  for (std::size_t i = 0;; ++i) {
    double v = start + step * static_cast<double>(i);
    if (v > stop + 1e-9) break;
    grid.push_back(v);
  }
  return grid;
}

// ---- build-lexicon ----

struct BuildLexiconOpts {
  std::string concreteness, phrases, adj_types, verb_exclusions, adj_exclusions, blacklist, out = "lexicon.json";
  std::vector<std::string> verbs, adjectives;
  double threshold = 4.0, alt_threshold = 4.5;
  int top_k = 2000, extra_cap = 282;
};

void build_lexicon(const CLI::App& sub, const BuildLexiconOpts& o) {
  auto table = load_concreteness(o.concreteness);
  for (const auto& w : table.warnings) log(w);
  auto nouns = select_nouns(table.rows, o.threshold, o.alt_threshold);
  if (!o.phrases.empty()) {
    std::set<std::string> concrete;
    for (const auto& n : nouns) concrete.insert(n.surface);
    auto multi = select_multiword_nouns(load_phrase_frequencies(o.phrases), concrete, o.top_k, o.extra_cap);
    nouns.insert(nouns.end(), multi.begin(), multi.end());
  }
  auto lists = [](const std::vector<std::string>& files) {
    std::vector<std::vector<std::string>> out;
    for (const auto& f : files) out.push_back(as_vector(load_word_set(f)));
    return out;
  };
  auto optional_set = [](const std::string& f) { return f.empty() ? std::set<std::string>{} : load_word_set(f); };
  auto verbs = select_verbs(lists(o.verbs), optional_set(o.verb_exclusions));
  std::map<std::string, std::string> types;
  if (!o.adj_types.empty()) types = load_adjective_types(o.adj_types);
  auto adjectives = select_adjectives(lists(o.adjectives), optional_set(o.adj_exclusions), types);

  auto blacklist = optional_set(o.blacklist);
  auto lex = make_lexicon(std::move(nouns), std::move(verbs), std::move(adjectives));
  auto removed = apply_blacklist(lex, blacklist);
  validate_lexicon(lex, blacklist);
  write_json(o.out, with_header(to_json(lex), header_for(sub, 0)));
  std::cout << "build-lexicon: " << lex.nouns.size() << " nouns, " << lex.verbs.size() << " verbs, "
            << lex.adjectives.size() << " adjectives (" << removed << " blacklisted) -> " << o.out << '\n';
}

// ---- gen-queries ----

struct GenQueriesOpts {
  std::string lexicon, corpus, terms_file, out = "queries.jsonl";
  std::uint64_t min_count = 3;
  unsigned threads = 1;
};

void gen_queries(const CLI::App& sub, const GenQueriesOpts& o) {
  std::vector<PairQuery> queries;
  if (!o.terms_file.empty()) {
    queries = queries_from_terms(read_lines(o.terms_file));
  } else {
    if (o.lexicon.empty() || o.corpus.empty())
      throw ValidationError("gen-queries needs --lexicon and --corpus, or --terms-file");
    auto lex = lexicon_from_json(read_json(o.lexicon));
    queries = build_pair_queries(lex.nouns, lex.adjectives, lex.verbs, load_corpus(o.corpus), o.min_count,
                                 o.threads);
  }
  std::vector<json> records;
  std::map<QueryKind, std::size_t> counts;
  for (const auto& q : queries) {
    records.push_back(to_json(q));
    ++counts[q.kind()];
  }
  write_jsonl(o.out, records, header_for(sub, 0));
  std::cout << "gen-queries: " << queries.size() << " queries (" << counts[QueryKind::noun] << " noun, "
            << counts[QueryKind::noun_adjective] << " noun-adjective, " << counts[QueryKind::noun_verb]
            << " noun-verb) -> " << o.out << '\n';
}

// ---- fetch ----

struct FetchOpts {
  std::string queries, manifest = "manifest.jsonl", endpoint, key_env = "BING_SEARCH_KEY", blacklist, fixed_time,
                       download_dir;
  int limit = 25;
  unsigned workers = 4;
  double rate = 3.0, burst = 1.0;
  int attempts = 3;
  double backoff = 1.0;
};

void fetch(const CLI::App& sub, const FetchOpts& o) {
  if (o.limit <= 0) throw ValidationError("--limit must be positive");
  if (!(o.rate > 0)) throw ValidationError("--rate must be positive");
  auto queries = read_queries(o.queries);

  std::string key;
  if (!starts_with(o.endpoint, "fixture:")) {
    const char* v = std::getenv(o.key_env.c_str());
    if (!v || !*v) throw ValidationError("API key variable " + o.key_env + " is not set");
    key = v;
  }
  auto client = make_search_client(o.endpoint, key);

  std::unique_ptr<Clock> clock;
  if (!o.fixed_time.empty()) {
    clock = std::make_unique<FixedWallClock>(parse_utc(o.fixed_time));
  } else {
    clock = std::make_unique<SystemClock>();
  }
  RateLimiter limiter(o.rate, o.burst, *clock);

  FetchOptions fo;
  fo.limit = o.limit;
  fo.retry.attempts = o.attempts;
  fo.retry.initial_backoff = o.backoff;
  if (!o.blacklist.empty()) fo.blacklist = load_word_set(o.blacklist);

  Manifest existing;
  if (fs::exists(o.manifest)) existing = read_manifest(o.manifest);
  ManifestAppender appender(o.manifest, header_for(sub, 0));
  auto summary = fetch_all(queries, existing, fo, *client, *clock, &limiter, o.workers, [&](const FetchResult& r) {
    if (r.failed) log("query " + r.query_id + " failed after " + std::to_string(r.attempts) + " attempts: " + r.error);
    appender.append(r.records);
  });

  if (!o.download_dir.empty()) {
    auto m = read_manifest(o.manifest);
    auto failures = download_images(m, o.download_dir, http_image_getter());
    write_manifest(o.manifest, m, header_for(sub, 0));
    if (failures) log(std::to_string(failures) + " image downloads failed");
  }
  std::cout << "fetch: " << summary.queries_fetched << " queries fetched, " << summary.queries_skipped
            << " skipped, " << summary.queries_failed << " failed, " << summary.records << " records -> "
            << o.manifest << '\n';
}

// ---- gen-qa ----

struct GenQaOpts {
  std::string queries, manifest, templates, out = "qa.jsonl";
  std::uint64_t seed = 0;
};

void gen_qa(const CLI::App& sub, const GenQaOpts& o) {
  std::map<std::string, PairQuery> by_id;
  for (auto& q : read_queries(o.queries)) by_id.emplace(q.id(), std::move(q));
  auto manifest = read_manifest(o.manifest);
  std::vector<QATemplate> custom;
  if (!o.templates.empty()) custom = load_templates(o.templates);
  const auto& templates = o.templates.empty() ? builtin_templates() : custom;

  std::vector<json> records;
  std::map<AnswerType, std::size_t> counts;
  for (const auto& r : manifest.records) {
    auto it = by_id.find(r.query_id);
    if (it == by_id.end()) throw ValidationError("manifest query '" + r.query_id + "' is not in " + o.queries);
    for (const auto& qa : generate_qas(it->second, r.url, o.seed, templates)) {
      records.push_back(to_json(qa));
      ++counts[qa.answer_type];
    }
  }
  write_jsonl(o.out, records, header_for(sub, o.seed));
  std::cout << "gen-qa: " << records.size() << " QAs from " << manifest.records.size() << " images (noun "
            << counts[AnswerType::noun] << ", adjective " << counts[AnswerType::adjective] << ", verb "
            << counts[AnswerType::verb] << ", entire_query " << counts[AnswerType::entire_query] << ") -> " << o.out
            << '\n';
}

// ---- split ----

struct SplitOpts {
  std::string manifest, out_dir = "splits";
  std::optional<std::size_t> train;
  std::size_t val = 0, test = 0;
  std::uint64_t seed = 0;
};

void split_cmd(const CLI::App& sub, const SplitOpts& o) {
  auto manifest = read_manifest(o.manifest);
  SplitSpec spec;
  spec.val_n = o.val;
  spec.test_n = o.test;
  spec.seed = o.seed;
  const auto total = manifest.records.size();
  if (o.train) {
    spec.train_n = *o.train;
  } else {
    if (o.val + o.test > total)
      throw ValidationError("--val + --test exceed the " + std::to_string(total) + " available pairs");
    spec.train_n = total - o.val - o.test;
  }
  auto s = split_pairs(manifest, spec);
  auto h = header_for(sub, o.seed);
  write_lines(fs::path(o.out_dir) / "train.txt", s.train, h);
  write_lines(fs::path(o.out_dir) / "val.txt", s.val, h);
  write_lines(fs::path(o.out_dir) / "test.txt", s.test, h);
  std::cout << "split: train " << s.train.size() << ", val " << s.val.size() << ", test " << s.test.size()
            << " -> " << o.out_dir << '\n';
}

// ---- verify ----

struct VerifyOpts {
  std::string pairs, votes, rule = "unanimous", out = "verified.txt";
};

void verify(const CLI::App& sub, const VerifyOpts& o) {
  auto pairs = read_lines(o.pairs);
  std::vector<VerificationVote> votes;
  for_each_jsonl(o.votes, [&](const json& j, std::size_t line) {
    try {
      votes.push_back(vote_from_json(j));
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(o.votes, line, e.what());
    }
  });
  auto r = apply_verification(pairs, votes, parse_verification_rule(o.rule));
  write_lines(o.out, r.retained, header_for(sub, 0));
  std::cout << "verify: retained " << r.retained.size() << " of " << r.voted << " voted pairs (rate "
            << fmt(r.retention_rate) << ") -> " << o.out << '\n';
}

// ---- shard ----

struct ShardOpts {
  std::string pairs, out = "shard.txt";
  std::size_t k = 4, epoch = 0;
  std::uint64_t seed = 0;
};

void shard(const CLI::App& sub, const ShardOpts& o) {
  auto a = shard_for_epoch(read_lines(o.pairs), o.k, o.seed, o.epoch);
  write_lines(o.out, a.items, header_for(sub, o.seed));
  std::cout << "shard: epoch " << o.epoch << " -> partition " << a.partition << " shard " << a.shard << ", "
            << a.items.size() << " items -> " << o.out << '\n';
}

// ---- schedule ----

struct ScheduleOpts {
  std::vector<std::string> sources, source_sizes;
  std::size_t batch_size = 0;
  std::uint64_t seed = 0;
  std::string out = "schedule.jsonl";
};

void schedule(const CLI::App& sub, const ScheduleOpts& o) {
  std::vector<SourceSize> sources;
  for (const auto& s : o.sources) {
    auto [name, path] = split_assignment(s, "--source");
    if (!fs::exists(path)) throw ValidationError("--source " + name + ": no such file '" + path + "'");
    std::size_t n = ends_with(path, ".jsonl") ? read_jsonl(path).size() : read_lines(path).size();
    sources.push_back({name, n});
  }
  for (const auto& s : o.source_sizes) {
    auto [name, value] = split_assignment(s, "--source-size");
    std::size_t pos = 0;
    unsigned long long n = 0;
    try {
      n = std::stoull(value, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != value.size() || value.empty()) throw ValidationError("--source-size " + name + ": not a count");
    sources.push_back({name, static_cast<std::size_t>(n)});
  }
  if (sources.empty()) throw ValidationError("schedule needs at least one --source or --source-size");
  auto sched = stratified_batches(sources, o.batch_size, o.seed);
  std::vector<json> records;
  for (std::size_t b = 0; b < sched.batches.size(); ++b) records.push_back(batch_to_json(sched, b));
  write_jsonl(o.out, records, header_for(sub, o.seed));
  std::cout << "schedule: " << sched.batches.size() << " batches of up to " << o.batch_size << " from "
            << sources.size() << " sources";
  if (!sched.batches.empty()) {
    std::cout << ", first batch";
    for (std::size_t s = 0; s < sources.size(); ++s) std::cout << ' ' << sources[s].name << '=' << sched.count(0, s);
  }
  std::cout << " -> " << o.out << '\n';
}

// ---- sample-dce ----

struct SampleDceOpts {
  std::string hierarchy, exclusions, boxes, vqa, out_dir = "dce";
  std::size_t cap = 25, vqa_cap = 50, max_answer_words = 2;
  std::uint64_t seed = 0;
};

void sample_dce(const CLI::App& sub, const SampleDceOpts& o) {
  auto h = header_for(sub, o.seed);
  auto nodes = load_hierarchy(o.hierarchy);
  auto sel = select_categories(nodes, o.exclusions.empty() ? std::set<std::string>{} : load_word_set(o.exclusions));
  for (const auto& w : sel.warnings) log(w);
  const fs::path dir(o.out_dir);
  write_lines(dir / "categories.txt", sel.categories, h);
  std::cout << "sample-dce: " << sel.categories.size() << " categories";

  if (!o.boxes.empty()) {
    auto anns = load_box_annotations(o.boxes);
    std::vector<json> cls, loc;
    for (const auto& s : sample_cls_cic(anns, sel.categories, o.cap, o.seed)) cls.push_back(to_json(s));
    for (const auto& s : sample_loc(anns, sel.categories, o.cap, o.seed)) loc.push_back(to_json(s));
    write_jsonl(dir / "cls.jsonl", cls, h);
    write_jsonl(dir / "loc.jsonl", loc, h);
    std::cout << ", " << cls.size() << " cls/cic, " << loc.size() << " loc";
  }
  if (!o.vqa.empty()) {
    std::vector<VQAAnnotation> anns;
    std::size_t dropped = 0;
    for_each_jsonl(o.vqa, [&](const json& j, std::size_t line) {
      VQAAnnotation a;
      try {
        a = vqa_from_json(j);
      } catch (const std::exception& e) {
        throw ParseError(o.vqa, line, e.what());
      }
      if (a.extra_answers.size() == 9) {
        auto agg = aggregate_vqa_answers(a.answer, a.extra_answers);
        if (!agg.retained) {
          ++dropped;
          return;
        }
      }
      anns.push_back(std::move(a));
    });
    anns = filter_vqa_answers(std::move(anns), o.max_answer_words);
    tag_vqa(anns, sel.categories);
    auto sampling = sample_vqa(anns, sel.categories, o.vqa_cap, o.seed);
    std::vector<json> out, trace;
    for (auto i : sampling.selected) out.push_back(to_json(anns[i]));
    for (const auto& t : sampling.trace)
      trace.push_back({{"category", t.category}, {"available", t.available}, {"already", t.already}, {"drawn", t.drawn}});
    write_jsonl(dir / "vqa.jsonl", out, h);
    write_jsonl(dir / "vqa_trace.jsonl", trace, h);
    std::cout << ", " << out.size() << " vqa (" << dropped << " without consensus)";
  }
  std::cout << " -> " << o.out_dir << '\n';
}

// ---- calibrate ----

std::map<std::string, std::string> read_gold_answers(const fs::path& path) {
  std::map<std::string, std::string> gold;
  for_each_jsonl(path, [&](const json& j, std::size_t line) {
    try {
      auto id = j.contains("id") ? j["id"].get<std::string>() : j.at("question_id").get<std::string>();
      auto answer = j.contains("answer") ? j["answer"].get<std::string>() : j.at("category").get<std::string>();
      gold[id] = answer;
    } catch (const std::exception& e) {
      throw ParseError(path.string(), line, e.what());
    }
  });
  return gold;
}

struct CalibrateOpts {
  std::string predictions, gold, seen, grid, out = "calibration.json";
};

void calibrate(const CLI::App& sub, const CalibrateOpts& o) {
  auto preds = load_candidate_predictions(o.predictions);
  auto gold = read_gold_answers(o.gold);
  std::vector<LabeledCandidates> val;
  for (const auto& [id, answer] : gold) {
    auto it = preds.find(id);
    if (it == preds.end()) throw ValidationError("no prediction for validation example '" + id + "'");
    val.push_back({it->second, answer});
  }
  std::set<std::string> seen;
  for (const auto& s : read_lines(o.seen)) seen.insert(normalize_answer(s));
  auto fit = o.grid.empty() ? fit_delta(val, seen) : fit_delta(val, seen, parse_grid(o.grid));
  json curve = json::array();
  for (const auto& [d, a] : fit.curve) curve.push_back({d, a});
  json j{{"delta", fit.delta}, {"accuracy", fit.accuracy}, {"curve", curve}, {"n_examples", val.size()}};
  write_json(o.out, with_header(j, header_for(sub, 0)));
  std::cout << "calibrate: delta " << fmt(fit.delta, 2) << " (val accuracy " << fmt(fit.accuracy) << " on "
            << val.size() << " examples) -> " << o.out << '\n';
}

// ---- score ----

struct ScoreOpts {
  std::string task, predictions, calibration, seen, out = "scored.jsonl";
  std::optional<double> delta, threshold, prune_threshold;
  double w_label = 1.0, w_other = -1.0, bias = 0.0, person_threshold = 0.5;
};

void score(const CLI::App& sub, const ScoreOpts& o) {
  auto header = read_prediction_header(o.predictions);
  if (!header.logprob_norm) log(o.predictions + " does not declare logprob_norm");
  std::vector<json> records;
  if (o.task == "classification" || o.task == "cic" || o.task == "vqa" || o.task == "web10k") {
    RecalibrationConfig cfg;
    if (!o.seen.empty()) {
      double delta = o.delta.value_or(0.0);
      if (!o.calibration.empty() && !o.delta) delta = read_json(o.calibration).at("delta").get<double>();
      cfg = make_recalibration(read_lines(o.seen), delta);
    } else if (o.delta || !o.calibration.empty()) {
      throw ValidationError("recalibration needs --seen");
    }
    for (const auto& [id, cands] : load_candidate_predictions(o.predictions)) {
      auto ranked = rank_answers(recalibrate(cands, cfg));
      json list = json::array();
      for (const auto& c : ranked.sorted) list.push_back(to_json(c));
      records.push_back({{"id", id}, {"answer", ranked.best.text}, {"logprob", ranked.best.logprob}, {"ranked", list}});
    }
  } else if (o.task == "localization") {
    LblParams p{o.w_label, o.w_other, o.bias};
    for (const auto& [id, regions] : load_region_predictions(o.predictions)) {
      json dets = json::array();
      for (const auto& d : localize(regions, p, o.threshold)) dets.push_back({{"box", to_json(d.box)}, {"score", d.score}});
      records.push_back({{"id", id}, {"detections", dets}});
    }
  } else if (o.task == "hoi") {
    HOIInferOptions opts;
    opts.person_threshold = o.person_threshold;
    opts.prune_threshold = o.prune_threshold;
    for (const auto& p : load_hoi_predictions(o.predictions))
      for (const auto& t : hoi_infer(p.image_id, p.candidates, opts)) records.push_back(to_json(t));
  } else {
    throw ValidationError("score: unknown --task '" + o.task + "'");
  }
  write_jsonl(o.out, records, header_for(sub, 0));
  std::cout << "score: " << records.size() << ' ' << o.task << " records -> " << o.out << '\n';
}

// ---- evaluate ----

struct EvaluateOpts {
  std::string task, input, gold, out = "report.json", csv;
  std::size_t k = 1;
  double iou = 0.5;
};

std::string field_id(const json& j) {
  if (j.contains("id")) return j["id"].get<std::string>();
  const auto& q = j.at("question_id");
  return q.is_string() ? q.get<std::string>() : std::to_string(q.get<long long>());
}

template <typename Fn>
void each_record(const fs::path& path, Fn fn) {
  for_each_jsonl(path, [&](const json& j, std::size_t line) {
    try {
      fn(j);
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(path.string(), line, e.what());
    }
  });
}

std::map<std::string, json> scored_by_id(const fs::path& path) {
  std::map<std::string, json> out;
  each_record(path, [&](const json& j) { out[j.at("id").get<std::string>()] = j; });
  return out;
}

void mean_into(std::map<std::string, std::pair<double, std::size_t>>& acc, const std::string& key, double v) {
  acc[key].first += v;
  acc[key].second += 1;
}

std::map<std::string, double> means(const std::map<std::string, std::pair<double, std::size_t>>& acc) {
  std::map<std::string, double> out;
  for (const auto& [k, v] : acc) out[k] = v.first / static_cast<double>(v.second);
  return out;
}

EvalReport evaluate_task(const EvaluateOpts& o) {
  EvalReport r;
  if (o.task == "web10k") {
    auto scored = scored_by_id(o.input);
    std::vector<TypedResult> results;
    std::map<std::string, std::pair<double, std::size_t>> per_kind;
    std::size_t missing = 0;
    for (const auto& qa : read_qas(o.gold)) {
      auto it = scored.find(qa.id);
      bool correct = false;
      if (it == scored.end()) {
        ++missing;
      } else {
        correct = normalize_answer(it->second.at("answer").get<std::string>()) == normalize_answer(qa.answer);
      }
      results.push_back({qa.answer_type, correct});
      const std::string kind = starts_with(qa.query_id, "a:") ? "noun_adjective"
                               : starts_with(qa.query_id, "v:") ? "noun_verb"
                                                                : "noun";
      mean_into(per_kind, kind, correct ? 1.0 : 0.0);
    }
    r = web10k_accuracy(results);
    r.per_category = means(per_kind);
    if (missing) r.notes["missing_predictions"] = std::to_string(missing);
  } else if (o.task == "vqa") {
    auto scored = scored_by_id(o.input);
    std::map<std::string, std::pair<double, std::size_t>> per_cat;
    double sum = 0;
    std::size_t n = 0, short_refs = 0, missing = 0;
    each_record(o.gold, [&](const json& j) {
      std::vector<std::string> refs;
      if (j.contains("references")) {
        refs = j["references"].get<std::vector<std::string>>();
      } else {
        refs.push_back(j.at("answer").get<std::string>());
        for (const auto& e : j.value("extra_answers", std::vector<std::string>{})) refs.push_back(e);
      }
      if (refs.size() < 10) ++short_refs;
      auto it = scored.find(field_id(j));
      double acc = 0;
      if (it == scored.end()) {
        ++missing;
      } else {
        acc = vqa_accuracy(it->second.at("answer").get<std::string>(), refs);
      }
      sum += acc;
      ++n;
      for (const auto& c : j.value("categories", std::vector<std::string>{})) mean_into(per_cat, c, acc);
    });
    r.task = "vqa";
    r.n_examples = n;
    r.overall = n ? sum / static_cast<double>(n) : 0.0;
    r.per_category = means(per_cat);
    if (short_refs) r.notes["examples_with_fewer_than_10_references"] = std::to_string(short_refs);
    if (missing) r.notes["missing_predictions"] = std::to_string(missing);
  } else if (o.task == "classification" || o.task == "cic") {
    auto scored = scored_by_id(o.input);
    std::map<std::string, std::pair<double, std::size_t>> per_cat;
    double sum = 0;
    std::size_t missing = 0;
    auto gold = read_gold_answers(o.gold);
    for (const auto& [id, answer] : gold) {
      auto it = scored.find(id);
      int hit = 0;
      if (it == scored.end()) {
        ++missing;
      } else {
        std::vector<CandidateAnswer> ranked;
        for (const auto& c : it->second.at("ranked")) ranked.push_back(candidate_from_json(c));
        hit = topk_accuracy(ranked, answer, o.k);
      }
      sum += hit;
      mean_into(per_cat, answer, hit);
    }
    r.task = o.task;
    r.n_examples = gold.size();
    r.overall = gold.empty() ? 0.0 : sum / static_cast<double>(gold.size());
    r.per_category = means(per_cat);
    r.notes["k"] = std::to_string(o.k);
    if (missing) r.notes["missing_predictions"] = std::to_string(missing);
  } else if (o.task == "localization") {
    auto scored = scored_by_id(o.input);
    std::vector<LocalizationSample> samples;
    each_record(o.gold, [&](const json& j) {
      LocalizationSample s;
      s.id = j.at("id").get<std::string>();
      s.category = j.at("category").get<std::string>();
      for (const auto& b : j.at("boxes")) s.gts.push_back(box_from_json(b));
      if (auto it = scored.find(s.id); it != scored.end())
        for (const auto& d : it->second.at("detections"))
          s.detections.push_back({box_from_json(d.at("box")), d.at("score").get<double>()});
      samples.push_back(std::move(s));
    });
    r = localization_map(samples, o.iou);
  } else if (o.task == "hoi") {
    std::vector<HOITriple> triples;
    each_record(o.input, [&](const json& j) {
      triples.push_back({j.at("image_id").get<std::string>(), box_from_json(j.at("person")),
                         box_from_json(j.at("object")), j.at("class").get<std::string>(), j.at("score").get<double>()});
    });
    std::vector<HOIGroundTruth> gts;
    each_record(o.gold, [&](const json& j) {
      gts.push_back({j.at("image_id").get<std::string>(), box_from_json(j.at("person")),
                     box_from_json(j.at("object")), j.at("class").get<std::string>()});
    });
    auto ap = hoi_ap(triples, gts, o.iou);
    r.task = "hoi";
    r.overall = ap.mean;
    r.per_category = ap.per_class;
    r.n_examples = gts.size();
  } else if (o.task == "captioning") {
    auto preds = load_caption_predictions(o.input);
    std::map<std::string, std::vector<std::string>> refs;
    each_record(o.gold, [&](const json& j) { refs[j.at("id").get<std::string>()] = j.at("references").get<std::vector<std::string>>(); });
    auto c = cider_d(preds, refs);
    r.task = "captioning";
    r.overall = c.score;
    r.n_examples = preds.size();
  } else {
    throw ValidationError("evaluate: unknown --task '" + o.task + "'");
  }
  return r;
}

void write_category_csv(const fs::path& path, const std::vector<EvalReport>& reports) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write '" + path.string() + "'");
  out << "task,category,value\n";
  out << std::setprecision(17);
  for (const auto& r : reports) {
    out << r.task << ",_overall," << r.overall << '\n';
    for (const auto& [k, v] : r.per_category) out << r.task << ',' << '"' << k << '"' << ',' << v << '\n';
  }
}

void evaluate(const CLI::App& sub, const EvaluateOpts& o) {
  auto report = evaluate_task(o);
  write_json(o.out, with_header(report.to_json(), header_for(sub, 0)));
  if (!o.csv.empty()) write_category_csv(o.csv, {report});
  std::cout << "evaluate: " << report.task << " overall " << fmt(report.overall) << " over " << report.n_examples
            << " examples -> " << o.out << '\n';
}

// ---- report ----

struct ReportOpts {
  std::vector<std::string> reports;
  std::string out = "summary.json", csv;
};

void report(const CLI::App& sub, const ReportOpts& o) {
  std::vector<EvalReport> reports;
  json arr = json::array();
  for (const auto& p : o.reports) {
    reports.push_back(EvalReport::from_json(read_json(p)));
    arr.push_back(reports.back().to_json());
  }
  write_json(o.out, with_header(json{{"reports", arr}}, header_for(sub, 0)));
  if (!o.csv.empty()) write_category_csv(o.csv, reports);
  for (const auto& r : reports) std::cerr << std::left << std::setw(16) << r.task << fmt(r.overall) << "  n=" << r.n_examples << '\n';
  std::cout << "report: " << reports.size() << " reports -> " << o.out << '\n';
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Build webly-supervised concept datasets, sample benchmarks, score and evaluate predictions."};
  app.name("conceptkit");
  app.set_config("--config", "", "TOML config file; command-line flags take precedence");
  app.require_subcommand(1);

  const auto existing = CLI::ExistingFile;
  std::function<void()> action;

  BuildLexiconOpts bl;
  auto* s = app.add_subcommand("build-lexicon", "Select nouns, verbs and adjectives");
  s->add_option("--concreteness", bl.concreteness, "Concreteness norms TSV")->required()->check(existing);
  s->add_option("--phrases", bl.phrases, "Multi-word phrase frequency TSV")->check(existing);
  s->add_option("--verbs", bl.verbs, "Verb source lists")->check(existing);
  s->add_option("--adjectives", bl.adjectives, "Adjective source lists")->check(existing);
  s->add_option("--adj-types", bl.adj_types, "Adjective type map TSV")->check(existing);
  s->add_option("--verb-exclusions", bl.verb_exclusions)->check(existing);
  s->add_option("--adj-exclusions", bl.adj_exclusions)->check(existing);
  s->add_option("--blacklist", bl.blacklist)->check(existing);
  s->add_option("--threshold", bl.threshold, "Concreteness threshold for plain nouns")->capture_default_str();
  s->add_option("--alt-threshold", bl.alt_threshold, "Threshold for words with other senses")->capture_default_str();
  s->add_option("--top-k", bl.top_k)->capture_default_str();
  s->add_option("--extra-cap", bl.extra_cap)->capture_default_str();
  s->add_option("--out", bl.out)->capture_default_str();
  s->callback([&, s] { action = [&, s] { build_lexicon(*s, bl); }; });

  GenQueriesOpts gq;
  s = app.add_subcommand("gen-queries", "Build search queries from the lexicon and a caption corpus");
  s->add_option("--lexicon", gq.lexicon)->check(existing);
  s->add_option("--corpus", gq.corpus, "Caption corpus, one caption per line")->check(existing);
  s->add_option("--terms-file", gq.terms_file, "Free-form terms, one per line")->check(existing)->excludes("--lexicon");
  s->add_option("--min-count", gq.min_count)->capture_default_str();
  s->add_option("--threads", gq.threads)->capture_default_str();
  s->add_option("--out", gq.out)->capture_default_str();
  s->callback([&, s] { action = [&, s] { gen_queries(*s, gq); }; });

  FetchOpts fo;
  s = app.add_subcommand("fetch", "Fetch image URLs for every query not yet in the manifest");
  s->add_option("--queries", fo.queries)->required()->check(existing);
  s->add_option("--manifest", fo.manifest)->capture_default_str();
  s->add_option("--api-endpoint", fo.endpoint, "Search URL, or fixture:<path> to replay a recording")->required();
  s->add_option("--api-key-env", fo.key_env, "Environment variable holding the API key")->capture_default_str();
  s->add_option("--limit", fo.limit)->capture_default_str();
  s->add_option("--workers", fo.workers)->capture_default_str();
  s->add_option("--rate", fo.rate, "Requests per second")->capture_default_str();
  s->add_option("--burst", fo.burst)->capture_default_str();
  s->add_option("--attempts", fo.attempts)->capture_default_str();
  s->add_option("--backoff", fo.backoff, "Initial retry backoff in seconds")->capture_default_str();
  s->add_option("--blacklist", fo.blacklist)->check(existing);
  s->add_option("--fixed-time", fo.fixed_time, "Record this ISO-8601 UTC time as fetched_at");
  s->add_option("--download-dir", fo.download_dir, "Also download image bytes here");
  s->callback([&, s] { action = [&, s] { fetch(*s, fo); }; });

  GenQaOpts qa;
  s = app.add_subcommand("gen-qa", "Turn manifest images into templated QA examples");
  s->add_option("--queries", qa.queries)->required()->check(existing);
  s->add_option("--manifest", qa.manifest)->required()->check(existing);
  s->add_option("--templates", qa.templates, "Template TSV replacing the built-in table")->check(existing);
  s->add_option("--seed", qa.seed)->capture_default_str();
  s->add_option("--out", qa.out)->capture_default_str();
  s->callback([&, s] { action = [&, s] { gen_qa(*s, qa); }; });

  SplitOpts sp;
  s = app.add_subcommand("split", "Split manifest pairs into train/val/test");
  s->add_option("--manifest", sp.manifest)->required()->check(existing);
  s->add_option("--train", sp.train, "Train size (default: everything not in val/test)");
  s->add_option("--val", sp.val)->capture_default_str();
  s->add_option("--test", sp.test)->capture_default_str();
  s->add_option("--seed", sp.seed)->capture_default_str();
  s->add_option("--out-dir", sp.out_dir)->capture_default_str();
  s->callback([&, s] { action = [&, s] { split_cmd(*s, sp); }; });

  VerifyOpts vo;
  s = app.add_subcommand("verify", "Apply crowd verification votes to a split");
  s->add_option("--pairs", vo.pairs)->required()->check(existing);
  s->add_option("--votes", vo.votes)->required()->check(existing);
  s->add_option("--rule", vo.rule)->check(CLI::IsMember({"unanimous", "majority"}))->capture_default_str();
  s->add_option("--out", vo.out)->capture_default_str();
  s->callback([&, s] { action = [&, s] { verify(*s, vo); }; });

  ShardOpts so;
  s = app.add_subcommand("shard", "Select the training shard for an epoch");
  s->add_option("--pairs", so.pairs)->required()->check(existing);
  s->add_option("--k", so.k)->capture_default_str();
  s->add_option("--epoch", so.epoch)->capture_default_str();
  s->add_option("--seed", so.seed)->capture_default_str();
  s->add_option("--out", so.out)->capture_default_str();
  s->callback([&, s] { action = [&, s] { shard(*s, so); }; });

  ScheduleOpts sc;
  s = app.add_subcommand("schedule", "Build stratified batches over several sources");
  s->add_option("--source", sc.sources, "NAME=PATH; size is the number of records in PATH");
  s->add_option("--source-size", sc.source_sizes, "NAME=COUNT");
  s->add_option("--batch-size", sc.batch_size)->required();
  s->add_option("--seed", sc.seed)->capture_default_str();
  s->add_option("--out", sc.out)->capture_default_str();
  s->callback([&, s] { action = [&, s] { schedule(*s, sc); }; });

  SampleDceOpts dc;
  s = app.add_subcommand("sample-dce", "Sample the benchmark from box and VQA annotations");
  s->add_option("--hierarchy", dc.hierarchy)->required()->check(existing);
  s->add_option("--exclusions", dc.exclusions, "Noisy categories to leave out")->check(existing);
  s->add_option("--boxes", dc.boxes, "Box annotation CSV")->check(existing);
  s->add_option("--vqa", dc.vqa, "VQA annotation JSON-Lines")->check(existing);
  s->add_option("--cap", dc.cap, "Per-category cap for cls/cic/loc")->capture_default_str();
  s->add_option("--vqa-cap", dc.vqa_cap)->capture_default_str();
  s->add_option("--max-answer-words", dc.max_answer_words)->capture_default_str();
  s->add_option("--seed", dc.seed)->capture_default_str();
  s->add_option("--out-dir", dc.out_dir)->capture_default_str();
  s->callback([&, s] { action = [&, s] { sample_dce(*s, dc); }; });

  CalibrateOpts ca;
  s = app.add_subcommand("calibrate", "Fit the seen-class penalty on validation predictions");
  s->add_option("--predictions", ca.predictions)->required()->check(existing);
  s->add_option("--gold", ca.gold)->required()->check(existing);
  s->add_option("--seen", ca.seen, "Seen classes, one per line")->required()->check(existing);
  s->add_option("--grid", ca.grid, "start:stop:step (default 0:10:0.25)");
  s->add_option("--out", ca.out)->capture_default_str();
  s->callback([&, s] { action = [&, s] { calibrate(*s, ca); }; });

  ScoreOpts sr;
  s = app.add_subcommand("score", "Turn model log-probabilities into answers, detections or HOI triples");
  s->add_option("--task", sr.task)
      ->required()
      ->check(CLI::IsMember({"classification", "cic", "vqa", "web10k", "localization", "hoi"}));
  s->add_option("--predictions", sr.predictions)->required()->check(existing);
  s->add_option("--seen", sr.seen, "Seen classes for recalibration")->check(existing);
  s->add_option("--calibration", sr.calibration, "Output of calibrate")->check(existing);
  s->add_option("--delta", sr.delta);
  s->add_option("--w-label", sr.w_label)->capture_default_str();
  s->add_option("--w-other", sr.w_other)->capture_default_str();
  s->add_option("--bias", sr.bias)->capture_default_str();
  s->add_option("--threshold", sr.threshold, "Minimum localization relevance");
  s->add_option("--person-threshold", sr.person_threshold)->capture_default_str();
  s->add_option("--prune-threshold", sr.prune_threshold, "Prune objects with p(no interaction) above this");
  s->add_option("--out", sr.out)->capture_default_str();
  s->callback([&, s] { action = [&, s] { score(*s, sr); }; });

  EvaluateOpts ev;
  s = app.add_subcommand("evaluate", "Compute a metric report");
  s->add_option("--task", ev.task)
      ->required()
      ->check(CLI::IsMember({"web10k", "vqa", "classification", "cic", "localization", "hoi", "captioning"}));
  s->add_option("--input", ev.input, "Output of score, or caption predictions")->required()->check(existing);
  s->add_option("--gold", ev.gold)->required()->check(existing);
  s->add_option("--k", ev.k, "Top-k for classification")->capture_default_str();
  s->add_option("--iou", ev.iou)->capture_default_str();
  s->add_option("--out", ev.out)->capture_default_str();
  s->add_option("--csv", ev.csv, "Also write per-category values as CSV");
  s->callback([&, s] { action = [&, s] { evaluate(*s, ev); }; });

  ReportOpts ro;
  s = app.add_subcommand("report", "Collect evaluation reports into one summary");
  s->add_option("--reports", ro.reports)->required()->check(existing);
  s->add_option("--out", ro.out)->capture_default_str();
  s->add_option("--csv", ro.csv);
  s->callback([&, s] { action = [&, s] { report(*s, ro); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    action();
    return 0;
  } catch (const ValidationError& e) {
    log(std::string("error: ") + e.what());
    return 1;
  } catch (const RuntimeFailure& e) {
    log(std::string("error: ") + e.what());
    return 2;
  } catch (const json::exception& e) {
    log(std::string("error: ") + e.what());
    return 1;
  } catch (const std::exception& e) {
    log(std::string("error: ") + e.what());
    return 2;
  }
}

}  // namespace conceptkit::cli
