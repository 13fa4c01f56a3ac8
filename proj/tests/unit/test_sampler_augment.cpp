// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <vector>

#include "tdeed/core/rng.hpp"
#include "tdeed/data/augment.hpp"
#include "tdeed/data/sampler.hpp"

using namespace tdeed;

namespace {

VideoAnnotations annotations(int length, std::vector<EventAnnotation> events) {
  VideoAnnotations ann;
  ann.video_id = "v";
  ann.length = length;
  ann.events = std::move(events);
  return ann;
}

data::ClipSample random_sample(Rng& rng, int h, int w, int len) {
  data::ClipSample s;
  s.frames = FeatureMapSeq<float>::zeros(3, h, w, len);
  for (Eigen::Index i = 0; i < s.frames.m.size(); ++i)
    s.frames.m(i) = static_cast<float>(rng.uniform());
  s.targets.class_targets = MatX<float>::Zero(3, len);
  s.targets.class_targets.row(0).setOnes();
  s.targets.disp = MatX<float>::Zero(1, len);
  return s;
}

}  // namespace

TEST_CASE("labels paint a diamond of frames around each event") {
  auto ann = annotations(200, {{50, 2}});
  auto t = data::make_targets<float>(ann, 45, 12, 3, 2);
  REQUIRE(t.class_targets.rows() == 4);
  REQUIRE(t.class_targets.cols() == 12);
  for (int l = 0; l < 12; ++l) {
    const int g = 45 + l;
    const int want = std::abs(g - 50) <= 2 ? 2 : 0;
    CHECK(t.class_targets(want, l) == 1.0f);
    CHECK(t.class_targets.col(l).sum() == 1.0f);
    CHECK(t.disp(0, l) == static_cast<float>(want == 2 ? 50 - g : 0));
  }
}

TEST_CASE("radius zero labels only the event frame itself") {
  auto ann = annotations(200, {{50, 2}});
  auto t = data::make_targets<float>(ann, 45, 12, 3, 0);
  for (int l = 0; l < 12; ++l) {
    CHECK(t.class_targets(l == 5 ? 2 : 0, l) == 1.0f);
    CHECK(t.disp(0, l) == 0.0f);
  }
}

TEST_CASE("the nearer event wins a contested frame, earlier on ties") {
  auto ann = annotations(100, {{10, 1}, {14, 3}});
  auto t = data::make_targets<float>(ann, 8, 9, 3, 2);
  // g: 8 9 10 11 12 13 14 15 16
  CHECK(t.class_targets(1, 2) == 1.0f);   // g=10
  CHECK(t.class_targets(1, 3) == 1.0f);   // g=11, dist 1 vs 3
  CHECK(t.class_targets(1, 4) == 1.0f);   // g=12, tie, earlier event
  CHECK(t.disp(0, 4) == -2.0f);
  CHECK(t.class_targets(3, 5) == 1.0f);   // g=13, dist 3 vs 1
  CHECK(t.disp(0, 5) == 1.0f);
}

TEST_CASE("events just before the window still reach into it") {
  auto ann = annotations(200, {{44, 1}});
  auto t = data::make_targets<float>(ann, 45, 8, 3, 2);
  CHECK(t.class_targets(1, 0) == 1.0f);
  CHECK(t.disp(0, 0) == -1.0f);
  CHECK(t.class_targets(1, 1) == 1.0f);
  CHECK(t.disp(0, 1) == -2.0f);
  CHECK(t.class_targets(0, 2) == 1.0f);
}

TEST_CASE("token-grid labels at stride one match the frame labels") {
  auto ann = annotations(300, {{33, 1}, {40, 2}, {41, 3}, {120, 1}});
  auto a = data::make_targets<float>(ann, 30, 20, 3, 2);
  auto b = data::make_scaled_targets<float>(ann, 30, 20, 1, 3, 2);
  CHECK((a.class_targets.array() == b.class_targets.array()).all());
  CHECK((a.disp.array() == b.disp.array()).all());
}

TEST_CASE("strided token labels measure distance in token units") {
  auto ann = annotations(400, {{9, 1}});
  auto t = data::make_scaled_targets<float>(ann, 0, 8, 4, 3, 2);
  // Tokens sit at frames 0,4,8,...; |9 - g| / 4 must stay within radius 2.
  CHECK(t.class_targets(0, 0) == 1.0f);  // dist 2.25
  CHECK(t.class_targets(1, 1) == 1.0f);
  CHECK(t.disp(0, 1) == doctest::Approx(1.25f));
  CHECK(t.class_targets(1, 2) == 1.0f);
  CHECK(t.disp(0, 2) == doctest::Approx(0.25f));
  CHECK(t.class_targets(1, 3) == 1.0f);
  CHECK(t.disp(0, 3) == doctest::Approx(-0.75f));
  CHECK(t.class_targets(1, 4) == 1.0f);
  CHECK(t.disp(0, 4) == doctest::Approx(-1.75f));
  CHECK(t.class_targets(0, 5) == 1.0f);  // dist 2.75
}

TEST_CASE("disabled augmentation is a bitwise identity") {
  Rng rng(5);
  auto s = random_sample(rng, 6, 6, 4);
  Rng draw(6);
  auto out = data::augment(s, data::AugmentCfg::all_off(), draw);
  CHECK((out.frames.m.array() == s.frames.m.array()).all());
  CHECK((out.targets.class_targets.array() == s.targets.class_targets.array()).all());
}

TEST_CASE("a horizontal flip mirrors pixels and undoes itself") {
  Rng rng(7);
  auto s = random_sample(rng, 4, 5, 3);
  data::AugmentCfg cfg = data::AugmentCfg::all_off();
  cfg.flip_prob = 1.0;
  Rng d1(1), d2(2);
  auto once = data::augment(s, cfg, d1);
  for (int t = 0; t < 3; ++t)
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 5; ++x)
        CHECK(once.frames.frame(t)(0, y * 5 + x) ==
              s.frames.frame(t)(0, y * 5 + (4 - x)));
  auto twice = data::augment(once, cfg, d2);
  CHECK((twice.frames.m.array() == s.frames.m.array()).all());
}

TEST_CASE("translation clamps at the frame edge") {
  FeatureMapSeq<float> f = FeatureMapSeq<float>::zeros(1, 1, 3, 1);
  f.m << 0.1f, 0.2f, 0.3f;
  data::detail::shift_frames(f, 1, 0);
  CHECK(f.m(0, 0) == 0.2f);
  CHECK(f.m(0, 1) == 0.3f);
  CHECK(f.m(0, 2) == 0.3f);
}

TEST_CASE("blur keeps constant frames constant") {
  FeatureMapSeq<float> f = FeatureMapSeq<float>::zeros(2, 4, 4, 2);
  f.m.setConstant(0.25f);
  data::detail::blur_frames(f);
  for (Eigen::Index i = 0; i < f.m.size(); ++i)
    CHECK(f.m(i) == doctest::Approx(0.25f).epsilon(1e-6));
}

TEST_CASE("every augmentation keeps pixels inside the unit interval") {
  Rng rng(8);
  auto cfg = data::AugmentCfg::training_defaults();
  for (int trial = 0; trial < 20; ++trial) {
    auto s = random_sample(rng, 8, 8, 3);
    Rng draw = Rng::derive(8, trial);
    auto out = data::augment(s, cfg, draw);
    CHECK(out.frames.m.minCoeff() >= 0.0f);
    CHECK(out.frames.m.maxCoeff() <= 1.0f);
    CHECK((out.targets.class_targets.array() == s.targets.class_targets.array()).all());
    CHECK((out.targets.disp.array() == s.targets.disp.array()).all());
  }
}

TEST_CASE("mixing endpoints reproduce the parent clips") {
  Rng rng(9);
  auto a = random_sample(rng, 4, 4, 3);
  auto b = random_sample(rng, 4, 4, 3);
  a.targets.class_targets(0, 1) = 0.0f;
  a.targets.class_targets(2, 1) = 1.0f;
  a.targets.disp(0, 1) = 3.0f;
  b.targets.class_targets(0, 2) = 0.0f;
  b.targets.class_targets(1, 2) = 1.0f;
  b.targets.disp(0, 2) = -1.0f;

  auto keep_a = data::mixup_with(a, b, 1.0f);
  CHECK((keep_a.frames.m.array() == a.frames.m.array()).all());
  CHECK((keep_a.targets.class_targets.array() == a.targets.class_targets.array()).all());
  CHECK(keep_a.targets.disp(0, 1) == 3.0f);

  auto keep_b = data::mixup_with(a, b, 0.0f);
  CHECK((keep_b.frames.m.array() == b.frames.m.array()).all());
  CHECK(keep_b.targets.disp(0, 2) == -1.0f);
}

TEST_CASE("the dominant clip contributes the displacement targets") {
  Rng rng(10);
  auto a = random_sample(rng, 4, 4, 3);
  auto b = random_sample(rng, 4, 4, 3);
  a.targets.disp(0, 0) = 2.0f;
  b.targets.disp(0, 0) = -2.0f;

  auto half = data::mixup_with(a, b, 0.5f);
  CHECK(half.targets.disp(0, 0) == 2.0f);  // ties keep the first clip
  auto mostly_b = data::mixup_with(a, b, 0.25f);
  CHECK(mostly_b.targets.disp(0, 0) == -2.0f);
  // Class rows blend linearly.
  CHECK(mostly_b.targets.class_targets(0, 0) == doctest::Approx(1.0f));
  CHECK(mostly_b.frames.m(0, 0) ==
        doctest::Approx(0.25f * a.frames.m(0, 0) + 0.75f * b.frames.m(0, 0)));
}
