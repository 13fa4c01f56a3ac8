// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "tdeed/core/errors.hpp"
#include "tdeed/data/generator.hpp"
#include "tdeed/model/heads.hpp"

namespace tdeed::infer {

/// Runs the model on one decoded clip. The clip always has exactly the
/// configured length; predictions must come back one per frame.
using ClipRunner =
    std::function<model::FramePredictions<float>(const FeatureMapSeq<float>&)>;

struct StitchResult {
  model::FramePredictions<float> preds;  // full video length
  std::vector<int> clip_starts;
  std::vector<std::string> warnings;
};

/// Covers the whole video with clips of length len starting every
/// len*(1-overlap) frames, the last clip right-aligned so no frame is
/// missed. Overlapped frames average their class distributions (then
/// renormalize) and average their displacements. Videos shorter than len
/// are padded by repeating the last frame, with a warning recorded.
inline StitchResult stitch(const data::SyntheticVideo& video,
                           const ClipRunner& run_clip, int len,
                           double overlap = 0.5) {
  check_config(len >= 1, "clip length: must be positive");
  check_config(overlap >= 0.0 && overlap < 1.0, "overlap: must lie in [0,1)");
  const int V = video.ann.length;
  StitchResult res;

  if (V < len) {
    res.warnings.push_back("video " + video.ann.video_id + " shorter than clip (" +
                           std::to_string(V) + " < " + std::to_string(len) +
                           "), padded with its last frame");
    FeatureMapSeq<float> clip = FeatureMapSeq<float>::zeros(3, video.h, video.w, len);
    const FeatureMapSeq<float> real = video.all_frames();
    clip.m.leftCols(real.m.cols()) = real.m;
    for (int t = V; t < len; ++t) clip.frame(t) = real.frame(V - 1);
    res.clip_starts.push_back(0);
    model::FramePredictions<float> p = run_clip(clip);
    check_contract(p.class_probs.cols() == len && p.disp.cols() == len,
                   "stitch: clip runner returned wrong length");
    res.preds.class_probs = p.class_probs.leftCols(V);
    res.preds.disp = p.disp.leftCols(V);
    res.preds.valid = V;
    return res;
  }

  const int stride =
      std::max(1, static_cast<int>(std::lround(len * (1.0 - overlap))));
  for (int start = 0; start + len <= V; start += stride)
    res.clip_starts.push_back(start);
  if (res.clip_starts.back() != V - len) res.clip_starts.push_back(V - len);

  MatX<float> prob_sum;
  MatX<float> disp_sum = MatX<float>::Zero(1, V);
  VecX<float> coverage = VecX<float>::Zero(V);
  for (const int start : res.clip_starts) {
    model::FramePredictions<float> p = run_clip(video.clip(start, len));
    check_contract(p.class_probs.cols() == len && p.disp.cols() == len,
                   "stitch: clip runner returned wrong length");
    if (prob_sum.size() == 0)
      prob_sum = MatX<float>::Zero(p.class_probs.rows(), V);
    prob_sum.middleCols(start, len) += p.class_probs;
    disp_sum.middleCols(start, len) += p.disp;
    coverage.segment(start, len).array() += 1.0f;
  }
  check_contract((coverage.array() > 0.0f).all(), "stitch: uncovered frames");

  res.preds.class_probs = prob_sum;
  res.preds.disp = disp_sum;
  for (int t = 0; t < V; ++t) {
    res.preds.class_probs.col(t) /= coverage(t);
    res.preds.disp(0, t) /= coverage(t);
    const float s = res.preds.class_probs.col(t).sum();
    if (s > 0.0f) res.preds.class_probs.col(t) /= s;
  }
  res.preds.valid = V;
  return res;
}

}  // namespace tdeed::infer
