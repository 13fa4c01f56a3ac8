// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <vector>

#include "tdeed/data/generator.hpp"
#include "tdeed/infer/stitch.hpp"

using namespace tdeed;

namespace {

// A video whose pixel (0,0) red channel stores the absolute frame index, so
// a clip runner can recover where its window fell.
data::SyntheticVideo indexed_video(int length) {
  data::SyntheticVideo v;
  v.ann.video_id = "t";
  v.ann.length = length;
  v.h = 2;
  v.w = 2;
  v.frames.assign(static_cast<std::size_t>(length) * 3 * v.h * v.w, 0);
  REQUIRE(length <= 255);
  for (int t = 0; t < length; ++t)
    v.frames[static_cast<std::size_t>(t) * 3 * v.h * v.w] =
        static_cast<std::uint8_t>(t);
  return v;
}

int frame_index_at(const FeatureMapSeq<float>& clip, int j) {
  return static_cast<int>(std::lround(clip.m(0, j * clip.h * clip.w) * 255.0f));
}

// Emits predictions that depend on the position inside the clip, making the
// overlap averaging observable: disp(j) = j and class row 0 carries
// (j + 0.5) / len.
infer::ClipRunner position_runner(int len) {
  return [len](const FeatureMapSeq<float>& clip) {
    REQUIRE(clip.len == len);
    model::FramePredictions<float> p;
    p.class_probs = MatX<float>::Zero(3, len);
    p.disp = MatX<float>::Zero(1, len);
    for (int j = 0; j < len; ++j) {
      const float a = (j + 0.5f) / len;
      p.class_probs(0, j) = a;
      p.class_probs(1, j) = 1.0f - a;
      p.disp(0, j) = static_cast<float>(j);
    }
    p.valid = len;
    return p;
  };
}

}  // namespace

TEST_CASE("half-overlap covers a video with the expected starts") {
  data::SyntheticVideo v = indexed_video(150);
  auto res = infer::stitch(v, position_runner(100), 100, 0.5);
  REQUIRE(res.clip_starts == std::vector<int>{0, 50});
  CHECK(res.warnings.empty());
  CHECK(res.preds.valid == 150);
  CHECK(res.preds.class_probs.cols() == 150);
  CHECK(res.preds.disp.cols() == 150);

  // Frames 0..49 come from the first clip alone, 100..149 from the second
  // alone, and 50..99 average the two windows.
  for (int t = 0; t < 150; ++t) {
    float want_disp;
    if (t < 50)
      want_disp = static_cast<float>(t);
    else if (t < 100)
      want_disp = static_cast<float>(t) - 25.0f;
    else
      want_disp = static_cast<float>(t - 50);
    CHECK(res.preds.disp(0, t) == doctest::Approx(want_disp).epsilon(1e-5));
    CHECK(res.preds.class_probs.col(t).sum() ==
          doctest::Approx(1.0).epsilon(1e-5));
  }
  // Overlap mean of (50.5 + 0.5)/2 per-hundred at t=50.
  CHECK(res.preds.class_probs(0, 50) == doctest::Approx(25.5 / 100).epsilon(1e-5));
}

TEST_CASE("a video of exactly one clip keeps the runner output") {
  data::SyntheticVideo v = indexed_video(100);
  auto runner = position_runner(100);
  auto res = infer::stitch(v, runner, 100, 0.5);
  REQUIRE(res.clip_starts == std::vector<int>{0});
  auto direct = runner(v.all_frames());
  for (int t = 0; t < 100; ++t) {
    CHECK(res.preds.disp(0, t) == doctest::Approx(direct.disp(0, t)));
    for (int r = 0; r < 3; ++r)
      CHECK(res.preds.class_probs(r, t) ==
            doctest::Approx(direct.class_probs(r, t)).epsilon(1e-6));
  }
}

TEST_CASE("zero overlap concatenates disjoint windows") {
  data::SyntheticVideo v = indexed_video(200);
  auto res = infer::stitch(v, position_runner(100), 100, 0.0);
  REQUIRE(res.clip_starts == std::vector<int>{0, 100});
  for (int t : {0, 99, 100, 199})
    CHECK(res.preds.disp(0, t) == doctest::Approx(static_cast<float>(t % 100)));
}

TEST_CASE("the final clip right-aligns when the stride overshoots") {
  data::SyntheticVideo v = indexed_video(130);
  auto res = infer::stitch(v, position_runner(100), 100, 0.5);
  REQUIRE(res.clip_starts == std::vector<int>{0, 30});
  // Frame 110 is only inside the right-aligned clip, at offset 80.
  CHECK(res.preds.disp(0, 110) == doctest::Approx(80.0f));
}

TEST_CASE("short videos are padded with their last frame and flagged") {
  data::SyntheticVideo v = indexed_video(60);
  bool saw_pad = false;
  infer::ClipRunner runner = [&](const FeatureMapSeq<float>& clip) {
    REQUIRE(clip.len == 100);
    // Every frame past the real video must replicate frame 59.
    saw_pad = true;
    for (int j = 60; j < 100; ++j) CHECK(frame_index_at(clip, j) == 59);
    return position_runner(100)(clip);
  };
  auto res = infer::stitch(v, runner, 100, 0.5);
  CHECK(saw_pad);
  REQUIRE(res.warnings.size() == 1);
  CHECK(res.warnings[0].find("shorter than clip") != std::string::npos);
  CHECK(res.preds.valid == 60);
  CHECK(res.preds.class_probs.cols() == 60);
  CHECK(res.preds.disp.cols() == 60);
}
