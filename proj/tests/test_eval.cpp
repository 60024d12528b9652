// Copyright 2026 The dcme Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dcme/eval.hpp"

#include <algorithm>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

using namespace dcme;

namespace {

EvalInstance inst(std::vector<std::int64_t> pixels, int cls = 1, double conf = 1.0) {
  EvalInstance e;
  e.pixels = std::move(pixels);
  std::sort(e.pixels.begin(), e.pixels.end());
  e.class_id = cls;
  e.confidence = conf;
  return e;
}

// Random small fixtures over a 20x20 grid for oracle comparisons.
std::vector<EvalInstance> random_instances(std::mt19937_64& rng, int max_n, bool preds) {
  std::uniform_int_distribution<int> n_d(1, max_n);
  std::uniform_int_distribution<int> pos_d(0, 15);
  std::uniform_int_distribution<int> side_d(2, 5);
  std::uniform_int_distribution<int> cls_d(1, 2);
  std::uniform_real_distribution<double> conf_d(0.1, 1.0);
  const int n = n_d(rng);
  std::vector<EvalInstance> out;
  for (int i = 0; i < n; ++i) {
    const int x0 = pos_d(rng), y0 = pos_d(rng);
    const int sw = side_d(rng), sh = side_d(rng);
    std::vector<std::int64_t> pixels;
    for (int y = y0; y < y0 + sh && y < 20; ++y)
      for (int x = x0; x < x0 + sw && x < 20; ++x) pixels.push_back(y * 20 + x);
    out.push_back(inst(std::move(pixels), cls_d(rng), preds ? conf_d(rng) : 1.0));
  }
  return out;
}

}  // namespace

TEST_CASE("iou basics") {
  EvalInstance a = inst({1, 2, 3, 4});
  CHECK(iou(a, a) == 1.0);
  EvalInstance b = inst({10, 11});
  CHECK(iou(a, b) == 0.0);
  EvalInstance c = inst({4, 5});
  EvalInstance d = inst({5, 6});
  CHECK(iou(c, d) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK_THROWS_AS(iou(EvalInstance{}, a), std::invalid_argument);
}

TEST_CASE("match_instances identity and empty cases") {
  EvalInstance gt = inst({0, 1, 2});
  MatchStats m = match_instances({gt}, {gt}, 0.5);
  CHECK(m.tp == 1);
  CHECK(m.fp == 0);
  CHECK(m.fn == 0);
  m = match_instances({}, {gt}, 0.5);
  CHECK(m.tp == 0);
  CHECK(m.fn == 1);
}

TEST_CASE("higher-confidence prediction claims the ground truth first") {
  // One 10 px ground truth; prediction A (conf 0.9) reaches IoU 0.6, B
  // (conf 0.8) reaches 0.7. A is ranked first and takes the match; B ends up
  // a false positive.
  EvalInstance gt = inst({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  EvalInstance a = inst({0, 1, 2, 3, 4, 5, 6, 7, 8, 20, 21, 22, 23, 24}, 1, 0.9);
  EvalInstance b = inst({0, 1, 2, 3, 4, 5, 6}, 1, 0.8);
  CHECK(iou(a, gt) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(iou(b, gt) == doctest::Approx(0.7).epsilon(1e-12));
  MatchStats m = match_instances({a, b}, {gt}, 0.5);
  REQUIRE(m.matches.size() == 1);
  CHECK(m.matches[0].first == 0);  // the 0.9 prediction wins despite lower IoU
  CHECK(m.fp == 1);
  CHECK(m.fn == 0);
}

TEST_CASE("equal confidences rank the larger mask first") {
  EvalInstance gt = inst({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  EvalInstance small = inst({0, 1, 2, 3, 4, 5}, 1, 0.5);  // IoU 0.6
  EvalInstance big = inst({0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, 1, 0.5);
  MatchStats m = match_instances({small, big}, {gt}, 0.5);
  REQUIRE(m.matches.size() == 1);
  CHECK(m.matches[0].first == 1);  // the big mask is processed first
}

TEST_CASE("perfect predictions give ap = ap50 = 1") {
  std::vector<EvalInstance> gts{inst({0, 1, 2}), inst({10, 11, 12, 13}), inst({40, 41})};
  std::vector<EvalInstance> preds = gts;
  preds[0].confidence = 0.2;
  preds[1].confidence = 0.9;
  preds[2].confidence = 0.5;
  ApReport r = average_precision(preds, gts);
  CHECK(r.ap == 1.0);
  CHECK(r.ap50 == 1.0);
}

TEST_CASE("single prediction at IoU 0.6 scores 3/10 on the default sweep") {
  // |gt| = |pred| = 8 sharing 6 pixels: IoU = 6/10 = 0.6.
  EvalInstance gt = inst({0, 1, 2, 3, 4, 5, 6, 7});
  EvalInstance pred = inst({2, 3, 4, 5, 6, 7, 8, 9}, 1, 0.7);
  CHECK(iou(pred, gt) == doctest::Approx(0.6).epsilon(1e-12));
  ApReport r = average_precision({pred}, {gt});
  CHECK(r.ap == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(r.ap50 == 1.0);
}

TEST_CASE("no ground truth at all is an error") {
  CHECK_THROWS_WITH_AS(average_precision({inst({1})}, {}), "nothing to evaluate",
                       std::invalid_argument);
}

TEST_CASE("class missing from predictions scores zero but stays in the report") {
  std::vector<EvalInstance> gts{inst({0, 1, 2}, 1), inst({10, 11}, 2)};
  std::vector<EvalInstance> preds{inst({0, 1, 2}, 1, 0.9)};
  ApReport r = average_precision(preds, gts);
  CHECK(r.per_class.at(1).ap == 1.0);
  CHECK(r.per_class.at(2).ap == 0.0);
  CHECK(r.ap == doctest::Approx(0.5));
}

TEST_CASE("ap is non-increasing in the IoU threshold") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<EvalInstance> gts = random_instances(rng, 4, false);
    std::vector<EvalInstance> preds = random_instances(rng, 4, true);
    double prev = 2.0;
    for (double thr : default_iou_thresholds()) {
      ApReport r = average_precision(preds, gts, {thr});
      CHECK(r.ap <= prev + 1e-12);
      prev = r.ap;
    }
  }
}

TEST_CASE("prediction input order does not change the report") {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<EvalInstance> gts = random_instances(rng, 5, false);
    std::vector<EvalInstance> preds = random_instances(rng, 5, true);
    ApReport a = average_precision(preds, gts);
    std::shuffle(preds.begin(), preds.end(), rng);
    ApReport b = average_precision(preds, gts);
    CHECK(a.ap == doctest::Approx(b.ap).epsilon(1e-12));
    CHECK(a.ap50 == doctest::Approx(b.ap50).epsilon(1e-12));
  }
}

TEST_CASE("scaling confidences leaves the report unchanged") {
  std::mt19937_64 rng(321);
  std::vector<EvalInstance> gts = random_instances(rng, 5, false);
  std::vector<EvalInstance> preds = random_instances(rng, 5, true);
  ApReport a = average_precision(preds, gts);
  for (EvalInstance& p : preds) p.confidence *= 0.125;
  ApReport b = average_precision(preds, gts);
  CHECK(a.ap == b.ap);
  CHECK(a.ap50 == b.ap50);
}

TEST_CASE("per-class ap never exceeds ap50") {
  std::mt19937_64 rng(555);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<EvalInstance> gts = random_instances(rng, 5, false);
    std::vector<EvalInstance> preds = random_instances(rng, 5, true);
    ApReport r = average_precision(preds, gts);
    for (const auto& [cls, entry] : r.per_class) {
      CHECK(entry.ap >= 0.0);
      CHECK(entry.ap <= entry.ap50 + 1e-12);
      CHECK(entry.ap50 <= 1.0);
    }
  }
}

TEST_CASE("implementation agrees with the exhaustive oracle") {
  std::mt19937_64 rng(2468);
  const std::vector<double> sweep = default_iou_thresholds();
  for (int trial = 0; trial < 150; ++trial) {
    std::vector<EvalInstance> gts = random_instances(rng, 6, false);
    std::vector<EvalInstance> preds = random_instances(rng, 6, true);
    // Match sets must coincide threshold by threshold.
    for (double thr : {0.5, 0.75}) {
      const MatchStats greedy = match_instances(preds, gts, thr);
      const oracles::BruteMatchResult brute = oracles::brute_match(preds, gts, thr);
      CHECK(greedy.tp == brute.tp);
      const std::vector<std::size_t> order = ranked_order(preds);
      std::vector<int> greedy_by_rank(order.size(), -1);
      for (const auto& [pi, gi] : greedy.matches)
        for (std::size_t k = 0; k < order.size(); ++k)
          if (order[k] == pi) greedy_by_rank[k] = static_cast<int>(gi);
      CHECK(greedy_by_rank == brute.gt_of_rank);
    }
    const ApReport fast = average_precision(preds, gts, sweep);
    const ApReport brute = oracles::brute_ap_report(preds, gts, sweep);
    CHECK(std::abs(fast.ap - brute.ap) <= 1e-12);
    CHECK(std::abs(fast.ap50 - brute.ap50) <= 1e-12);
  }
}

TEST_CASE("instances_from_label_map extracts masks, classes, and labels") {
  LabelMap lm = LabelMap::Zero(4, 4);
  lm(0, 0) = 2;
  lm(3, 3) = 2;
  lm(1, 1) = 5;
  LabelMap cls = LabelMap::Zero(4, 4);
  cls(0, 0) = 7;
  cls(3, 3) = 7;
  cls(1, 1) = 3;
  auto instances = instances_from_label_map(lm, &cls, 0.25);
  REQUIRE(instances.size() == 2);
  CHECK(instances[0].source_label == 2);
  CHECK(instances[0].pixels == std::vector<std::int64_t>{0, 15});
  CHECK(instances[0].class_id == 7);
  CHECK(instances[0].confidence == 0.25);
  CHECK(instances[1].source_label == 5);
  CHECK(instances[1].class_id == 3);
}

TEST_CASE("pixel accuracy follows the matched correspondence") {
  LabelMap gt = LabelMap::Zero(4, 4);
  gt.block(0, 0, 2, 2) = 1;
  LabelMap pred = LabelMap::Zero(4, 4);
  pred.block(0, 0, 2, 2) = 3;  // same mask, different label value
  CHECK(pixel_accuracy(pred, gt) == 1.0);
  pred(0, 0) = 0;
  CHECK(pixel_accuracy(pred, gt) == doctest::Approx(15.0 / 16.0));
  CHECK(pixel_accuracy(LabelMap::Zero(4, 4), gt) == doctest::Approx(12.0 / 16.0));
}
