// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdlib>

#include "tdeed/core/errors.hpp"
#include "tdeed/core/events.hpp"
#include "tdeed/data/generator.hpp"
#include "tdeed/train/loss.hpp"

namespace tdeed::data {

/// One training example: a clip of frames plus its per-frame supervision.
struct ClipSample {
  FeatureMapSeq<float> frames;
  train::ClipTargets<float> targets;
};

/// Builds per-frame supervision for the clip [start, start+len) of one video.
/// Every frame within radius of an annotated event takes that event's class
/// and a displacement pointing at it (event frame minus own frame, so the
/// prediction is decoded as frame + disp). When two events both cover a
/// frame the nearer wins; at equal distance the earlier event wins. Events
/// just outside the window still paint the frames they reach.
template <class S>
train::ClipTargets<S> make_targets(const VideoAnnotations& ann, int start,
                                   int len, int num_classes, int radius) {
  check_config(radius >= 0, "radius: must be non-negative");
  check_config(num_classes >= 1, "num_classes: must be positive");
  check_range(start >= 0 && len >= 1 && start + len <= ann.length,
              "make_targets: clip window outside the video");

  train::ClipTargets<S> out;
  out.class_targets = MatX<S>::Zero(num_classes + 1, len);
  out.disp = MatX<S>::Zero(1, len);
  for (int l = 0; l < len; ++l) {
    const int g = start + l;
    int best_cls = 0, best_dist = radius + 1, best_frame = 0;
    bool found = false;
    for (const auto& e : ann.events) {
      check_contract(e.class_id >= 1 && e.class_id <= num_classes,
                     "make_targets: event class outside [1, num_classes]");
      const int dist = std::abs(e.frame - g);
      if (dist > radius) continue;
      // Events are sorted by frame, so strict improvement keeps the earlier
      // event on distance ties.
      if (!found || dist < best_dist) {
        found = true;
        best_dist = dist;
        best_cls = e.class_id;
        best_frame = e.frame;
      }
    }
    out.class_targets(best_cls, l) = S(1);
    if (found) out.disp(0, l) = S(best_frame - g);
  }
  return out;
}

/// Targets for a token grid with one token every `stride` input frames,
/// covering [start, start + num_tokens*stride). Distances and displacements
/// are measured in token units, so radius keeps its meaning at every scale
/// and stride=1 reproduces make_targets exactly. Used by pyramid training,
/// where each level supervises its own resolution.
template <class S>
train::ClipTargets<S> make_scaled_targets(const VideoAnnotations& ann, int start,
                                          int num_tokens, int stride,
                                          int num_classes, int radius) {
  check_config(radius >= 0, "radius: must be non-negative");
  check_config(num_classes >= 1, "num_classes: must be positive");
  check_range(start >= 0 && num_tokens >= 1 && stride >= 1 &&
                  start + (num_tokens - 1) * stride < ann.length,
              "make_scaled_targets: token grid outside the video");

  train::ClipTargets<S> out;
  out.class_targets = MatX<S>::Zero(num_classes + 1, num_tokens);
  out.disp = MatX<S>::Zero(1, num_tokens);
  for (int l = 0; l < num_tokens; ++l) {
    const double g = start + static_cast<double>(l) * stride;
    int best_cls = 0, best_frame = 0;
    double best_dist = radius + 1.0;
    bool found = false;
    for (const auto& e : ann.events) {
      const double dist = std::abs(e.frame - g) / stride;
      if (dist > radius) continue;
      if (!found || dist < best_dist) {
        found = true;
        best_dist = dist;
        best_cls = e.class_id;
        best_frame = e.frame;
      }
    }
    out.class_targets(best_cls, l) = S(1);
    if (found) out.disp(0, l) = S((best_frame - g) / stride);
  }
  return out;
}

/// Decodes the frame window and labels it in one step.
inline ClipSample sample_clip(const SyntheticVideo& video, int start, int len,
                              int num_classes, int radius) {
  ClipSample s;
  s.frames = video.clip(start, len);
  s.targets = make_targets<float>(video.ann, start, len, num_classes, radius);
  return s;
}

}  // namespace tdeed::data
