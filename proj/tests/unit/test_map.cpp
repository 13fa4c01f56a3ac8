// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "tdeed/core/rng.hpp"
#include "tdeed/eval/map.hpp"

using namespace tdeed;
using std::vector;

namespace {

// Literal restatement of the metric definition: sort by score, match each
// prediction to the nearest free ground truth within delta (earlier frame on
// ties), accumulate the PR curve, take the precision envelope, integrate.
double oracle_ap(vector<SpottedEvent> preds, const vector<VideoAnnotations>& gt,
                 int class_id, int delta) {
  struct G {
    std::string video;
    int frame;
    bool used = false;
  };
  vector<G> gts;
  for (const auto& v : gt)
    for (const auto& e : v.events)
      if (e.class_id == class_id) gts.push_back({v.video_id, e.frame, false});
  if (gts.empty()) return 0.0;

  preds.erase(std::remove_if(preds.begin(), preds.end(),
                             [&](const SpottedEvent& p) {
                               return p.class_id != class_id;
                             }),
              preds.end());
  if (preds.empty()) return 0.0;
  std::stable_sort(preds.begin(), preds.end(), eval::eval_order);

  vector<int> hits;
  for (const auto& p : preds) {
    int pick = -1;
    for (std::size_t j = 0; j < gts.size(); ++j) {
      if (gts[j].used || gts[j].video != p.video_id) continue;
      const int dist = std::abs(gts[j].frame - p.frame);
      if (dist > delta) continue;
      if (pick < 0 || dist < std::abs(gts[pick].frame - p.frame) ||
          (dist == std::abs(gts[pick].frame - p.frame) &&
           gts[j].frame < gts[pick].frame))
        pick = static_cast<int>(j);
    }
    if (pick >= 0) {
      gts[pick].used = true;
      hits.push_back(1);
    } else {
      hits.push_back(0);
    }
  }

  vector<double> prec(hits.size()), rec(hits.size());
  int tp = 0;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    tp += hits[i];
    prec[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    rec[i] = static_cast<double>(tp) / static_cast<double>(gts.size());
  }
  for (int i = static_cast<int>(hits.size()) - 2; i >= 0; --i)
    prec[i] = std::max(prec[i], prec[i + 1]);
  double ap = 0.0, last = 0.0;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    ap += (rec[i] - last) * prec[i];
    last = rec[i];
  }
  return ap;
}

vector<VideoAnnotations> single_video_gt(const vector<std::pair<int, int>>& ev) {
  VideoAnnotations v;
  v.video_id = "v";
  v.length = 100;
  for (auto [frame, cls] : ev) v.events.push_back({frame, cls});
  std::sort(v.events.begin(), v.events.end(),
            [](const EventAnnotation& a, const EventAnnotation& b) {
              return a.frame < b.frame;
            });
  return {v};
}

}  // namespace

TEST_CASE("perfect detector scores ap 1.0") {
  auto gt = single_video_gt({{10, 1}, {40, 1}, {70, 1}});
  vector<SpottedEvent> preds = {
      {"v", 10, 1, 0.9}, {"v", 40, 1, 0.8}, {"v", 70, 1, 0.7}};
  CHECK(eval::average_precision(preds, gt, 1, 0) == doctest::Approx(1.0));
}

TEST_CASE("no predictions score ap 0.0") {
  auto gt = single_video_gt({{10, 1}});
  CHECK(eval::average_precision({}, gt, 1, 1) == doctest::Approx(0.0));
}

TEST_CASE("hand-computed three-prediction fixture") {
  // GTs at 10 and 20; predictions by descending score: frame 11 (hit,
  // within delta=1), frame 40 (miss), frame 20 (hit). PR points: (1/1, 0.5),
  // (1/2, 0.5), (2/3, 1.0). Envelope keeps 1 then 2/3; AP = 1*0.5 + (2/3)*0.5.
  auto gt = single_video_gt({{10, 1}, {20, 1}});
  vector<SpottedEvent> preds = {
      {"v", 11, 1, 0.9}, {"v", 40, 1, 0.8}, {"v", 20, 1, 0.7}};
  const double ap = eval::average_precision(preds, gt, 1, 1);
  CHECK(ap == doctest::Approx(1.0 * 0.5 + (2.0 / 3.0) * 0.5).epsilon(1e-6));
  CHECK(ap == doctest::Approx(0.8333).epsilon(1e-4));
}

TEST_CASE("one ground truth absorbs only one prediction") {
  auto gt = single_video_gt({{10, 1}});
  vector<SpottedEvent> preds = {{"v", 10, 1, 0.9}, {"v", 11, 1, 0.8}};
  // Second prediction cannot re-match the used GT: precision points are
  // 1/1 then 1/2, recall saturates at 1 immediately, AP = 1.
  CHECK(eval::average_precision(preds, gt, 1, 1) == doctest::Approx(1.0));
}

TEST_CASE("matching prefers the nearer ground truth, then the earlier") {
  auto gt = single_video_gt({{10, 1}, {12, 1}});
  // A prediction at 11 is equidistant: it must take the earlier GT (10),
  // leaving 12 for the later, lower-scored prediction.
  vector<SpottedEvent> preds = {{"v", 11, 1, 0.9}, {"v", 12, 1, 0.8}};
  CHECK(eval::average_precision(preds, gt, 1, 1) == doctest::Approx(1.0));
}

TEST_CASE("videos never cross-match") {
  VideoAnnotations a, b;
  a.video_id = "a";
  a.length = 50;
  a.events.push_back({10, 1});
  b.video_id = "b";
  b.length = 50;
  vector<VideoAnnotations> gt = {a, b};
  vector<SpottedEvent> preds = {{"b", 10, 1, 0.9}};
  CHECK(eval::average_precision(preds, gt, 1, 1) == doctest::Approx(0.0));
}

TEST_CASE("map averages only classes that appear in the ground truth") {
  auto gt = single_video_gt({{10, 1}, {30, 2}});
  vector<SpottedEvent> preds = {{"v", 10, 1, 0.9}, {"v", 31, 2, 0.8},
                                {"v", 50, 3, 0.7}};
  // Class 3 has no GT and is excluded, not averaged in as 0 (nor rewarded).
  const double m1 = eval::map_at(preds, gt, 3, 1);
  CHECK(m1 == doctest::Approx(1.0));
}

TEST_CASE("widening the tolerance never lowers map") {
  Rng rng(201);
  for (int it = 0; it < 40; ++it) {
    VideoAnnotations v;
    v.video_id = "v";
    v.length = 60;
    const int n_gt = rng.uniform_int(1, 5);
    for (int i = 0; i < n_gt; ++i)
      v.events.push_back({rng.uniform_int(0, 59), rng.uniform_int(1, 3)});
    std::sort(v.events.begin(), v.events.end(),
              [](const EventAnnotation& a, const EventAnnotation& b) {
                return a.frame < b.frame;
              });
    v.events.erase(std::unique(v.events.begin(), v.events.end(),
                               [](const EventAnnotation& a,
                                  const EventAnnotation& b) {
                                 return a.frame == b.frame;
                               }),
                   v.events.end());
    vector<VideoAnnotations> gt = {v};
    vector<SpottedEvent> preds;
    const int n_p = rng.uniform_int(0, 6);
    for (int i = 0; i < n_p; ++i)
      preds.push_back({"v", rng.uniform_int(0, 59), rng.uniform_int(1, 3),
                       0.05 + 0.95 * rng.uniform()});
    const double m1 = eval::map_at(preds, gt, 3, 1);
    const double m2 = eval::map_at(preds, gt, 3, 2);
    CAPTURE(it);
    CHECK(m2 >= m1 - 1e-12);
  }
}

TEST_CASE("average precision matches the enumerative oracle") {
  Rng rng(202);
  for (int it = 0; it < 200; ++it) {
    VideoAnnotations v1, v2;
    v1.video_id = "a";
    v1.length = 40;
    v2.video_id = "b";
    v2.length = 40;
    for (auto* v : {&v1, &v2}) {
      const int n = rng.uniform_int(0, 4);
      for (int i = 0; i < n; ++i)
        v->events.push_back({rng.uniform_int(0, 39), rng.uniform_int(1, 2)});
      std::sort(v->events.begin(), v->events.end(),
                [](const EventAnnotation& a, const EventAnnotation& b) {
                  return a.frame < b.frame;
                });
      v->events.erase(std::unique(v->events.begin(), v->events.end(),
                                  [](const EventAnnotation& a,
                                     const EventAnnotation& b) {
                                    return a.frame == b.frame;
                                  }),
                      v->events.end());
    }
    vector<VideoAnnotations> gt = {v1, v2};

    vector<SpottedEvent> preds;
    const int n_p = rng.uniform_int(0, 6);
    for (int i = 0; i < n_p; ++i)
      preds.push_back({rng.bernoulli(0.5) ? "a" : "b", rng.uniform_int(0, 39),
                       rng.uniform_int(1, 2), 0.05 + 0.95 * rng.uniform()});

    const int delta = rng.uniform_int(0, 3);
    CAPTURE(it);
    for (int cls : {1, 2}) {
      bool has_gt = false;
      for (const auto& v : gt)
        for (const auto& e : v.events)
          if (e.class_id == cls) has_gt = true;
      if (!has_gt) continue;
      const double lib = eval::average_precision(preds, gt, cls, delta);
      const double ora = oracle_ap(preds, gt, cls, delta);
      CHECK(std::abs(lib - ora) < 1e-9);
    }
  }
}
