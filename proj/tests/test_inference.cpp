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

#include <cmath>
#include <set>

#include "conceptkit/error.hpp"
#include "conceptkit/geometry.hpp"
#include "conceptkit/hoi.hpp"
#include "conceptkit/random.hpp"
#include "conceptkit/scoring.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace conceptkit;

namespace {

std::vector<CandidateAnswer> random_candidates(Rng& rng, std::size_t n) {
  std::vector<CandidateAnswer> c;
  for (std::size_t i = 0; i < n; ++i)
    c.push_back({"w" + std::to_string(rng.below(12)), -4.0 * rng.unit()});
  return c;
}

}  // namespace

TEST_CASE("iou basics") {
  BoundingBox a{0, 0, 1, 1}, b{0.5, 0, 1.5, 1}, far{5, 5, 6, 6}, touch{1, 0, 2, 1};
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, far) == 0.0);
  CHECK(iou(a, touch) == 0.0);
  CHECK(iou(a, b) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  Rng rng(8);
  for (int i = 0; i < 500; ++i) {
    auto x = oracle::random_box(rng), y = oracle::random_box(rng);
    CHECK(iou(x, y) == iou(y, x));
    CHECK(iou(x, y) == doctest::Approx(oracle::iou(x, y)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(make_box(0, 0, 0, 1), ValidationError);
  CHECK_THROWS_AS(box_from_json(json::parse("[0,0,1]")), ValidationError);
  CHECK(box_from_json(to_json(b)) == b);
}

TEST_CASE("nms simple cases") {
  std::vector<BoundingBox> same{{0, 0, 2, 2}, {0, 0, 2, 2}};
  std::vector<double> s{0.4, 0.9};
  CHECK(nms(same, s, 0.7) == std::vector<std::size_t>{1});
  std::vector<BoundingBox> disjoint{{0, 0, 1, 1}, {2, 2, 3, 3}, {4, 4, 5, 5}};
  CHECK(nms(disjoint, std::vector<double>{0.1, 0.3, 0.2}, 0.5) == std::vector<std::size_t>{1, 2, 0});
  CHECK(nms(same, std::vector<double>{0.5, 0.5}, 0.7) == std::vector<std::size_t>{0});
  CHECK_THROWS_AS(nms(same, std::vector<double>{0.5}, 0.7), ValidationError);
}

TEST_CASE("nms equals the brute-force reference on small inputs") {
  Rng rng(31);
  for (int trial = 0; trial < 2000; ++trial) {
    std::size_t n = rng.below(9);
    std::vector<BoundingBox> boxes;
    std::vector<double> scores;
    for (std::size_t i = 0; i < n; ++i) {
      boxes.push_back(oracle::random_box(rng, 12));
      scores.push_back(static_cast<double>(rng.below(4)));
    }
    double thr = static_cast<double>(rng.below(10)) / 10.0;
    CHECK(nms(boxes, scores, thr) == oracle::nms(boxes, scores, thr));
  }
}

TEST_CASE("rank_answers") {
  auto r = rank_answers({{"dog", -0.1}, {"cat", -2}});
  CHECK(r.best.text == "dog");
  CHECK(rank_answers({{"solo", -3}}).best.text == "solo");
  CHECK(rank_answers({{"a", -1}, {"b", -1}}).best.text == "a");
  CHECK(rank_answers({{"cat", -2}, {"dog", -0.1}}).best.text == "dog");
  CHECK_THROWS_AS(rank_answers({}), ValidationError);
  CHECK_THROWS_AS(rank_answers({{"x", std::nan("")}}), ValidationError);
  CHECK_THROWS_AS(rank_answers({{"x", -INFINITY}}), ValidationError);
}

TEST_CASE("rank_answers is invariant under monotone transforms") {
  Rng rng(4);
  for (int t = 0; t < 300; ++t) {
    auto c = random_candidates(rng, 1 + rng.below(8));
    auto winner = rank_answers(c).best.text;
    auto mapped = c;
    for (auto& x : mapped) x.logprob = 3.0 * x.logprob - 7.0;
    CHECK(rank_answers(mapped).best.text == winner);
    for (auto& x : mapped) x.logprob = std::log(std::exp(x.logprob) + 1.0) - 10.0;
    CHECK(rank_answers(mapped).best.text == winner);
  }
}

TEST_CASE("recalibrate penalizes seen classes only") {
  auto cfg = make_recalibration({"Cat"}, 1.0);
  auto out = recalibrate({{"the cat", -0.5}, {"jaguar", -1.0}}, cfg);
  CHECK(out[0].logprob == doctest::Approx(-1.5));
  CHECK(out[1].logprob == -1.0);
  CHECK(rank_answers(out).best.text == "jaguar");
  CHECK_THROWS_AS(make_recalibration({"cat"}, -0.5), ValidationError);

  Rng rng(12);
  auto zero = make_recalibration({"w1", "w2", "w3"}, 0.0);
  for (int t = 0; t < 200; ++t) {
    auto c = random_candidates(rng, 1 + rng.below(6));
    CHECK(recalibrate(c, zero) == c);
  }
}

TEST_CASE("recalibrate preserves order within seen and within unseen candidates") {
  Rng rng(13);
  auto cfg = make_recalibration({"w0", "w1", "w2", "w3", "w4", "w5"}, 2.25);
  for (int t = 0; t < 200; ++t) {
    auto c = random_candidates(rng, 8);
    auto r = recalibrate(c, cfg);
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = 0; j < c.size(); ++j) {
        bool si = cfg.seen_classes.count(c[i].text), sj = cfg.seen_classes.count(c[j].text);
        if (si == sj && c[i].logprob < c[j].logprob) CHECK(r[i].logprob < r[j].logprob);
      }
  }
}

TEST_CASE("fit_delta picks the smallest best grid value") {
  std::set<std::string> seen{"cat", "dog"};
  std::vector<LabeledCandidates> val{{{{"cat", -0.2}, {"lynx", -0.5}}, "lynx"},
                                     {{{"dog", -1.0}, {"wolf", -1.6}}, "wolf"}};
  auto fit = fit_delta(val, seen);
  CHECK(fit.delta == 0.75);
  CHECK(fit.accuracy == 1.0);
  CHECK(fit.curve.size() == 41);
  CHECK(fit_delta(val, seen, {0.0}).delta == 0.0);
  CHECK_THROWS_AS(fit_delta({}, seen), ValidationError);
  CHECK_THROWS_AS(fit_delta(val, seen, {}), ValidationError);
}

TEST_CASE("fit_delta over {0} composed with recalibrate equals plain ranking") {
  Rng rng(21);
  std::set<std::string> seen{"w1", "w3", "w5"};
  for (int t = 0; t < 100; ++t) {
    std::vector<LabeledCandidates> val;
    for (int i = 0; i < 5; ++i) {
      auto c = random_candidates(rng, 1 + rng.below(5));
      val.push_back({c, c[rng.below(c.size())].text});
    }
    auto fit = fit_delta(val, seen, {0.0});
    RecalibrationConfig cfg{seen, fit.delta};
    for (const auto& ex : val)
      CHECK(rank_answers(recalibrate(ex.candidates, cfg)).best == rank_answers(ex.candidates).best);
  }
}

TEST_CASE("lbl relevance and localization") {
  RegionScore r{BoundingBox{0, 0, 1, 1}, -0.1, -3.0};
  CHECK(lbl_relevance(r) == doctest::Approx(2.9));
  CHECK(lbl_relevance(RegionScore{BoundingBox{0, 0, 1, 1}, -1.2, -1.2}) == 0.0);
  CHECK(lbl_relevance(r, LblParams{0, 0, 0.3}) == 0.3);

  CHECK(localize({}).empty());
  std::vector<RegionScore> regions{{BoundingBox{0, 0, 1, 1}, -2, -1},
                                   {BoundingBox{1, 1, 2, 2}, -0.1, -4},
                                   {BoundingBox{2, 2, 3, 3}, -1, -1.5}};
  auto dets = localize(regions);
  REQUIRE(dets.size() == 3);
  CHECK(dets[0].region == 1);
  CHECK(dets[1].region == 2);
  CHECK(dets[2].region == 0);
  CHECK(localize(regions, {}, dets[0].score).size() == 1);
}

TEST_CASE("fit_lbl recovers an exact linear relation") {
  std::vector<RegionScore> regions;
  std::vector<bool> targets;
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    double a = -3 * rng.unit(), b = -3 * rng.unit();
    regions.push_back({BoundingBox{0, 0, 1, 1}, a, b});
    targets.push_back(a > b);
  }
  auto p = fit_lbl(regions, targets);
  int agree = 0;
  for (std::size_t i = 0; i < regions.size(); ++i) agree += (lbl_relevance(regions[i], p) > 0.5) == targets[i];
  CHECK(agree >= 40);
  CHECK_THROWS_AS(fit_lbl({regions[0], regions[1]}, {true, false}), ValidationError);
}

TEST_CASE("gerunds and label text") {
  CHECK(hoi_label_text("ride", "horse") == "riding the horse");
  CHECK(gerund("sit") == "sitting");
  CHECK(gerund("lie") == "lying");
  CHECK(gerund("eat") == "eating");
  CHECK(gerund("hold") == "holding");
  CHECK(gerund("see") == "seeing");
  CHECK(gerund("throw") == "throwing");
  CHECK(gerund("running") == "running");
  CHECK(hoi_label_text("sit_on", "dining_table") == "sitting on the dining table");
}

TEST_CASE("hoi_build_targets merges duplicate persons and appends unmatched objects") {
  BoundingBox p{0, 0, 10, 20};
  std::vector<HOIAnnotation> anns{{p, BoundingBox{10, 0, 30, 20}, "ride", "horse"},
                                  {p, BoundingBox{10, 0, 30, 20}, "feed", "horse"}};
  auto t = hoi_build_targets(anns, {BoundingBox{10, 0, 30, 20}, BoundingBox{50, 50, 60, 60}});
  REQUIRE(t.persons.size() == 1);
  CHECK(t.appended == 0);
  REQUIRE(t.assignment.size() == 2);
  CHECK(t.assignment[0] == std::pair<std::size_t, std::size_t>{0, 0});
  CHECK(t.labels[0][0] == std::vector<std::string>{"feeding the horse", "riding the horse"});
  CHECK(t.labels[0][1] == std::vector<std::string>{kNoInteraction});

  BoundingBox gt{0, 0, 10, 10}, det{6, 0, 16, 10};
  CHECK(iou(gt, det) == doctest::Approx(0.25));
  auto u = hoi_build_targets({{p, gt, "kick", "ball"}}, {det});
  CHECK(u.appended == 1);
  CHECK(u.regions.back() == gt);
  CHECK(u.assignment[0].second == 1);
}

TEST_CASE("every annotation maps to one surviving person and one region") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<HOIAnnotation> anns;
    std::size_t n = 1 + rng.below(6);
    for (std::size_t i = 0; i < n; ++i)
      anns.push_back({oracle::random_box(rng, 10), oracle::random_box(rng, 10), "hold", "cup"});
    std::vector<BoundingBox> dets;
    for (std::size_t i = 0; i < rng.below(5); ++i) dets.push_back(oracle::random_box(rng, 10));
    auto t = hoi_build_targets(anns, dets);
    REQUIRE(t.assignment.size() == n);
    CHECK(t.persons.size() <= n);
    CHECK(t.regions.size() == dets.size() + t.appended);
    for (std::size_t i = 0; i < n; ++i) {
      auto [pi, ri] = t.assignment[i];
      REQUIRE(pi < t.persons.size());
      REQUIRE(ri < t.regions.size());
      double best = 0;
      for (const auto& q : t.persons) best = std::max(best, iou(anns[i].person, q));
      CHECK(iou(anns[i].person, t.persons[pi]) == best);
      CHECK(iou(anns[i].object, t.regions[ri]) >= 0.5);
      CHECK(t.labels[pi][ri] != std::vector<std::string>{kNoInteraction});
    }
  }
}

TEST_CASE("hoi_infer thresholds, prunes and orders") {
  HOICandidate base;
  base.person = BoundingBox{0, 0, 10, 10};
  base.object = BoundingBox{10, 0, 20, 10};
  base.person_score = 0.9;
  base.interaction_logprobs = {{"ride horse", -0.5}, {"feed horse", -1.5}};
  base.no_interaction_logprob = -2.0;

  auto t = hoi_infer("img", {base});
  REQUIRE(t.size() == 2);
  CHECK(t[0].hoi_class == "ride horse");
  CHECK(t[1].hoi_class == "feed horse");
  CHECK(t[0].score == -0.5);

  auto low = base;
  low.person_score = 0.4;
  CHECK(hoi_infer("img", {low}).empty());
  low.person_score = 0.5;
  CHECK(hoi_infer("img", {low}).empty());

  auto none = base;
  none.no_interaction_logprob = -0.1;
  CHECK(hoi_infer("img", {none}).empty());

  HOIInferOptions opts;
  opts.prune_threshold = 0.95;
  CHECK(hoi_infer("img", {none}, opts).size() == 2);
  opts.prune_threshold = 0.5;
  CHECK(hoi_infer("img", {none}, opts).empty());
}

TEST_CASE("hoi prediction records") {
  auto j = json::parse(R"({"image_id":"i1","persons":[{"box":[0,0,10,10],"score":0.8}],
    "pairs":[{"person_idx":0,"box":[10,0,20,10],"labels":{"ride horse":-0.3},"no_interaction":-2.5}]})");
  auto c = hoi_candidates_from_json(j);
  REQUIRE(c.size() == 1);
  CHECK(c[0].person_score == 0.8);
  CHECK(c[0].interaction_logprobs.at("ride horse") == -0.3);
  j["pairs"][0]["person_idx"] = 3;
  CHECK_THROWS_AS(hoi_candidates_from_json(j), ValidationError);
  auto t = to_json(HOITriple{"i1", BoundingBox{0, 0, 1, 1}, BoundingBox{1, 1, 2, 2}, "ride horse", -0.3});
  CHECK(t["class"] == "ride horse");
}
