// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>

#include "tdeed/core/errors.hpp"
#include "tdeed/core/rng.hpp"
#include "tdeed/data/sampler.hpp"

namespace tdeed::data {

/// Spatial/photometric augmentation switches. Each draw is made once per
/// clip and applied identically to every frame, so the temporal structure
/// (and therefore the labels) is untouched. Default-constructed = all off.
struct AugmentCfg {
  double crop_prob = 0.0;       // translate by up to max_shift px, edge clamp
  int max_shift = 4;
  double flip_prob = 0.0;       // horizontal mirror
  double blur_prob = 0.0;       // 3x3 box blur, edge clamp
  double jitter_prob = 0.0;     // per-channel scale and global brightness
  double jitter_strength = 0.2;

  static AugmentCfg all_off() { return {}; }
  static AugmentCfg training_defaults() {
    return {0.5, 4, 0.5, 0.25, 0.25, 0.2};
  }
};

namespace detail {

inline void shift_frames(FeatureMapSeq<float>& f, int dx, int dy) {
  if (dx == 0 && dy == 0) return;
  MatX<float> src(f.channels, f.h * f.w);
  for (int t = 0; t < f.len; ++t) {
    src = f.frame(t);
    auto dst = f.frame(t);
    for (int y = 0; y < f.h; ++y) {
      const int sy = std::clamp(y + dy, 0, f.h - 1);
      for (int x = 0; x < f.w; ++x) {
        const int sx = std::clamp(x + dx, 0, f.w - 1);
        dst.col(y * f.w + x) = src.col(sy * f.w + sx);
      }
    }
  }
}

inline void flip_frames(FeatureMapSeq<float>& f) {
  for (int t = 0; t < f.len; ++t) {
    auto fr = f.frame(t);
    for (int y = 0; y < f.h; ++y)
      for (int x = 0; x < f.w / 2; ++x)
        fr.col(y * f.w + x).swap(fr.col(y * f.w + (f.w - 1 - x)));
  }
}

inline void blur_frames(FeatureMapSeq<float>& f) {
  MatX<float> src(f.channels, f.h * f.w);
  for (int t = 0; t < f.len; ++t) {
    src = f.frame(t);
    auto dst = f.frame(t);
    for (int y = 0; y < f.h; ++y) {
      for (int x = 0; x < f.w; ++x) {
        VecX<float> acc = VecX<float>::Zero(f.channels);
        for (int oy = -1; oy <= 1; ++oy)
          for (int ox = -1; ox <= 1; ++ox)
            acc += src.col(std::clamp(y + oy, 0, f.h - 1) * f.w +
                           std::clamp(x + ox, 0, f.w - 1));
        dst.col(y * f.w + x) = acc / 9.0f;
      }
    }
  }
}

}  // namespace detail

/// Applies the enabled augmentations in a fixed order (crop, flip, blur,
/// jitter). Pixel values stay in [0,1]; targets are returned untouched.
inline ClipSample augment(const ClipSample& in, const AugmentCfg& cfg, Rng& rng) {
  check_config(cfg.crop_prob >= 0 && cfg.crop_prob <= 1 && cfg.flip_prob >= 0 &&
                   cfg.flip_prob <= 1 && cfg.blur_prob >= 0 &&
                   cfg.blur_prob <= 1 && cfg.jitter_prob >= 0 &&
                   cfg.jitter_prob <= 1,
               "augment: probabilities must lie in [0,1]");
  ClipSample out = in;
  if (cfg.crop_prob > 0 && rng.bernoulli(cfg.crop_prob)) {
    const int dx = rng.uniform_int(-cfg.max_shift, cfg.max_shift);
    const int dy = rng.uniform_int(-cfg.max_shift, cfg.max_shift);
    detail::shift_frames(out.frames, dx, dy);
  }
  if (cfg.flip_prob > 0 && rng.bernoulli(cfg.flip_prob))
    detail::flip_frames(out.frames);
  if (cfg.blur_prob > 0 && rng.bernoulli(cfg.blur_prob))
    detail::blur_frames(out.frames);
  if (cfg.jitter_prob > 0 && rng.bernoulli(cfg.jitter_prob)) {
    const float s = static_cast<float>(cfg.jitter_strength);
    VecX<float> scale(out.frames.channels);
    for (int ch = 0; ch < out.frames.channels; ++ch)
      scale(ch) = static_cast<float>(rng.uniform(1.0 - s, 1.0 + s));
    const float shift = static_cast<float>(rng.uniform(-0.5 * s, 0.5 * s));
    out.frames.m = (scale.asDiagonal() * out.frames.m).array() + shift;
    out.frames.m = out.frames.m.cwiseMax(0.0f).cwiseMin(1.0f);
  }
  return out;
}

/// Blends two same-shape clips with a fixed mixing weight. Class targets mix
/// with the same lambda (soft targets); displacement targets come from
/// whichever clip dominates (lambda >= 0.5 keeps a's).
inline ClipSample mixup_with(const ClipSample& a, const ClipSample& b,
                             float lam) {
  check_contract(lam >= 0.0f && lam <= 1.0f, "mixup: lambda outside [0,1]");
  check_contract(a.frames.m.rows() == b.frames.m.rows() &&
                     a.frames.m.cols() == b.frames.m.cols() &&
                     a.frames.h == b.frames.h && a.frames.w == b.frames.w &&
                     a.frames.len == b.frames.len,
                 "mixup: clip shapes differ");
  check_contract(a.targets.class_targets.rows() == b.targets.class_targets.rows() &&
                     a.targets.class_targets.cols() == b.targets.class_targets.cols(),
                 "mixup: target shapes differ");
  ClipSample out;
  out.frames = a.frames;
  out.frames.m = lam * a.frames.m + (1.0f - lam) * b.frames.m;
  out.targets.class_targets =
      lam * a.targets.class_targets + (1.0f - lam) * b.targets.class_targets;
  out.targets.disp = lam >= 0.5f ? a.targets.disp : b.targets.disp;
  return out;
}

/// Mixup with lambda drawn from Beta(alpha, beta).
inline ClipSample mixup(const ClipSample& a, const ClipSample& b, double alpha,
                        double beta, Rng& rng) {
  check_contract(alpha > 0 && beta > 0, "mixup: alpha and beta must be positive");
  return mixup_with(a, b, static_cast<float>(rng.beta(alpha, beta)));
}

}  // namespace tdeed::data
