// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "tdeed/core/rng.hpp"
#include "tdeed/infer/suppress.hpp"

using namespace tdeed;
using infer::SnmsMode;
using std::vector;

namespace {

// Step-by-step reference implementations, written against the stated
// suppression rules only (no shared code with the library versions).

vector<SpottedEvent> oracle_nms(vector<SpottedEvent> pool, int window) {
  vector<SpottedEvent> kept;
  while (!pool.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pool.size(); ++i)
      if (infer::better_candidate(pool[i], pool[best])) best = i;
    SpottedEvent sel = pool[best];
    kept.push_back(sel);
    vector<SpottedEvent> next;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (i == best) continue;
      if (pool[i].class_id == sel.class_id &&
          std::abs(pool[i].frame - sel.frame) <= window)
        continue;
      next.push_back(pool[i]);
    }
    pool = std::move(next);
  }
  return kept;
}

vector<SpottedEvent> oracle_soft_nms(vector<SpottedEvent> pool, int window,
                                     SnmsMode mode, double sigma,
                                     double final_threshold) {
  vector<SpottedEvent> kept;
  while (!pool.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pool.size(); ++i)
      if (infer::better_candidate(pool[i], pool[best])) best = i;
    SpottedEvent sel = pool[best];
    pool.erase(pool.begin() + static_cast<long>(best));
    kept.push_back(sel);
    for (auto& c : pool) {
      if (c.class_id != sel.class_id) continue;
      const int df = std::abs(c.frame - sel.frame);
      if (window == 0 || df > window) continue;
      if (mode == SnmsMode::linear)
        c.score *= 1.0 - static_cast<double>(window - df + 1) / (window + 1);
      else
        c.score *= std::exp(-static_cast<double>(df) * df / (2.0 * sigma * sigma));
    }
  }
  vector<SpottedEvent> out;
  for (const auto& c : kept)
    if (c.score >= final_threshold) out.push_back(c);
  return out;
}

bool same_events(const vector<SpottedEvent>& a, const vector<SpottedEvent>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].video_id != b[i].video_id || a[i].frame != b[i].frame ||
        a[i].class_id != b[i].class_id)
      return false;
    if (std::abs(a[i].score - b[i].score) > 1e-12) return false;
  }
  return true;
}

vector<SpottedEvent> random_candidates(Rng& rng, int max_n) {
  const int n = rng.uniform_int(0, max_n);
  vector<SpottedEvent> out;
  for (int i = 0; i < n; ++i)
    out.push_back({"v", rng.uniform_int(0, 12), rng.uniform_int(1, 3),
                   0.05 + 0.95 * rng.uniform()});
  return out;
}

}  // namespace

TEST_CASE("nms keeps the stronger of two near candidates") {
  vector<SpottedEvent> in = {{"v", 10, 1, 0.9}, {"v", 11, 1, 0.8}};
  auto out = infer::nms(in, 1);
  REQUIRE(out.size() == 1);
  CHECK(out[0].frame == 10);
  CHECK(out[0].score == doctest::Approx(0.9));
}

TEST_CASE("nms never suppresses across classes") {
  vector<SpottedEvent> in = {{"v", 10, 1, 0.9}, {"v", 10, 2, 0.8}};
  auto out = infer::nms(in, 3);
  CHECK(out.size() == 2);
}

TEST_CASE("nms output is an antichain within the window") {
  Rng rng(101);
  for (int it = 0; it < 50; ++it) {
    auto in = random_candidates(rng, 12);
    const int window = rng.uniform_int(0, 4);
    auto out = infer::nms(in, window);
    for (std::size_t i = 0; i < out.size(); ++i)
      for (std::size_t j = i + 1; j < out.size(); ++j) {
        if (out[i].class_id != out[j].class_id) continue;
        CHECK(std::abs(out[i].frame - out[j].frame) > window);
      }
    CHECK(out.size() <= in.size());
  }
}

TEST_CASE("soft nms leaves a single candidate untouched") {
  vector<SpottedEvent> in = {{"v", 5, 1, 0.4}};
  auto out = infer::soft_nms(in, 3, SnmsMode::linear, 1.0, 0.05);
  REQUIRE(out.size() == 1);
  CHECK(out[0].score == doctest::Approx(0.4));
}

TEST_CASE("soft nms with window zero only applies the final threshold") {
  vector<SpottedEvent> in = {
      {"v", 5, 1, 0.4}, {"v", 6, 1, 0.3}, {"v", 7, 1, 0.01}};
  auto out = infer::soft_nms(in, 0, SnmsMode::linear, 1.0, 0.05);
  REQUIRE(out.size() == 2);
  CHECK(out[0].score == doctest::Approx(0.4));
  CHECK(out[1].score == doctest::Approx(0.3));
}

TEST_CASE("soft nms six-candidate linear decay fixture") {
  // Hand-iterated before implementation. Linear decay at window=3
  // multiplies by df/4; final_threshold 0.05.
  //   select A(f10, .90): B(df1) .8->.2, C(df2) .6->.3, F(df3) .3->.225
  //   select E(f30, .50): nothing within 3 frames
  //   select D(f20, .45): nothing within 3 frames
  //   select C(f12, .30): B(df1) .2->.05, F(df1) .225->.05625
  //   select F(f13, .05625): B(df2) .05->.025
  //   select B(f11, .025)
  // The threshold keeps A, E, D, C, F and drops B.
  vector<SpottedEvent> in = {
      {"v", 10, 1, 0.90},  // A
      {"v", 11, 1, 0.80},  // B
      {"v", 12, 1, 0.60},  // C
      {"v", 20, 1, 0.45},  // D
      {"v", 30, 1, 0.50},  // E
      {"v", 13, 1, 0.30},  // F
  };
  auto out = infer::soft_nms(in, 3, SnmsMode::linear, 1.0, 0.05);
  REQUIRE(out.size() == 5);
  CHECK(out[0].frame == 10);
  CHECK(out[0].score == doctest::Approx(0.90));
  CHECK(out[1].frame == 30);
  CHECK(out[1].score == doctest::Approx(0.50));
  CHECK(out[2].frame == 20);
  CHECK(out[2].score == doctest::Approx(0.45));
  CHECK(out[3].frame == 12);
  CHECK(out[3].score == doctest::Approx(0.30));
  CHECK(out[4].frame == 13);
  CHECK(out[4].score == doctest::Approx(0.05625));
}

TEST_CASE("soft nms with a zero decay factor degenerates to nms") {
  Rng rng(102);
  for (int it = 0; it < 50; ++it) {
    auto in = random_candidates(rng, 10);
    const int window = rng.uniform_int(0, 3);
    auto hard = infer::nms(in, window);
    auto soft = infer::soft_nms_with_decay(
        in, window, [](int) { return 0.0; }, 1e-30);
    // Zero decay wipes every in-window rival, so the kept survivors above
    // threshold coincide with the hard-NMS picks.
    vector<SpottedEvent> soft_nonzero;
    for (const auto& c : soft)
      if (c.score > 0.0) soft_nonzero.push_back(c);
    CHECK(same_events(hard, soft_nonzero));
  }
}

TEST_CASE("suppression matches the exhaustive oracles on random instances") {
  Rng rng(103);
  for (int it = 0; it < 200; ++it) {
    auto in = random_candidates(rng, 10);
    const int window = rng.uniform_int(0, 4);
    CAPTURE(it);

    CHECK(same_events(infer::nms(in, window), oracle_nms(in, window)));

    const double thr = rng.uniform() * 0.2;
    const double sigma = 0.5 + rng.uniform();
    const auto mode = it % 2 == 0 ? SnmsMode::linear : SnmsMode::gaussian;
    CHECK(same_events(infer::soft_nms(in, window, mode, sigma, thr),
                      oracle_soft_nms(in, window, mode, sigma, thr)));
  }
}

TEST_CASE("suppression only rescores or drops, never invents") {
  Rng rng(104);
  for (int it = 0; it < 50; ++it) {
    auto in = random_candidates(rng, 10);
    auto soft = infer::soft_nms(in, 3, SnmsMode::linear, 1.0, 0.0);
    for (const auto& kept : soft) {
      bool found = false;
      for (const auto& orig : in)
        if (orig.frame == kept.frame && orig.class_id == kept.class_id &&
            orig.score >= kept.score - 1e-12)
          found = true;
      CHECK(found);
    }
  }
}

TEST_CASE("decode candidates applies displacement with clamping") {
  model::FramePredictions<float> p;
  p.class_probs = MatX<float>::Zero(3, 12);
  p.class_probs.row(0).setOnes();
  p.disp = MatX<float>::Zero(1, 12);
  p.valid = 12;

  // frame 10: class 1 prob 0.9, disp -2 -> candidate at frame 8
  p.class_probs(0, 10) = 0.1f;
  p.class_probs(1, 10) = 0.9f;
  p.disp(0, 10) = -2.0f;
  // frame 1: disp pushes past the left edge -> clamp to 0
  p.class_probs(0, 1) = 0.5f;
  p.class_probs(2, 1) = 0.5f;
  p.disp(0, 1) = -7.0f;

  auto cands = infer::decode_candidates(p, "vid", 0.25);
  REQUIRE(cands.size() == 2);
  CHECK(cands[0].frame == 0);
  CHECK(cands[0].class_id == 2);
  CHECK(cands[1].frame == 8);
  CHECK(cands[1].class_id == 1);
  CHECK(cands[1].score == doctest::Approx(0.9));
}

TEST_CASE("decode on all-background predictions is empty") {
  model::FramePredictions<float> p;
  p.class_probs = MatX<float>::Zero(4, 6);
  p.class_probs.row(0).setOnes();
  p.disp = MatX<float>::Zero(1, 6);
  p.valid = 6;
  CHECK(infer::decode_candidates(p, "vid", 0.01).empty());
}

TEST_CASE("two frames may decode onto the same target frame") {
  model::FramePredictions<float> p;
  p.class_probs = MatX<float>::Zero(2, 4);
  p.class_probs.row(0).setOnes();
  p.disp = MatX<float>::Zero(1, 4);
  p.valid = 4;
  p.class_probs(1, 1) = 0.6f;
  p.disp(0, 1) = 1.0f;
  p.class_probs(1, 3) = 0.7f;
  p.disp(0, 3) = -1.0f;
  auto cands = infer::decode_candidates(p, "vid", 0.1);
  REQUIRE(cands.size() == 2);
  CHECK(cands[0].frame == 2);
  CHECK(cands[1].frame == 2);
}
