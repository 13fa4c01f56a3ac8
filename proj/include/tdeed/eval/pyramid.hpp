// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tdeed/core/errors.hpp"
#include "tdeed/data/generator.hpp"
#include "tdeed/eval/map.hpp"
#include "tdeed/infer/suppress.hpp"
#include "tdeed/model/tdeed.hpp"

namespace tdeed::eval {

/// Decodes predictions whose tokens sit every `stride` input frames starting
/// at clip_start. Displacements are in token units, so the reconstructed
/// frame is clip_start + (l + disp)*stride, clamped to the video.
template <class S>
std::vector<SpottedEvent> decode_scaled(const model::FramePredictions<S>& preds,
                                        const std::string& video_id,
                                        int clip_start, int stride,
                                        int video_len, double threshold) {
  check_config(threshold >= 0.0 && threshold < 1.0,
               "threshold: must lie in [0,1)");
  check_contract(stride >= 1 && video_len >= 1, "decode: bad geometry");
  std::vector<SpottedEvent> out;
  for (int l = 0; l < preds.valid; ++l) {
    const double pos = (l + static_cast<double>(preds.disp(0, l))) * stride;
    const int frame = static_cast<int>(
        std::clamp<long>(clip_start + std::lround(pos), 0, video_len - 1));
    for (int c = 1; c < preds.class_probs.rows(); ++c) {
      const double p = static_cast<double>(preds.class_probs(c, l));
      if (p > threshold) out.push_back({video_id, frame, c, p});
    }
  }
  return out;
}

struct PyramidLayerResult {
  int layer = 0;
  double standalone_map = 0.0;
  double cumulative_map = 0.0;
};

struct PyramidEvalCfg {
  int delta = 1;
  double threshold = 0.01;
  int window = 3;
  double final_threshold = 0.05;
};

/// Per-level mAP of a pyramid model over whole videos. Videos are tiled with
/// non-overlapping clips (last clip right-aligned); every level's candidates
/// are decoded per clip, pooled per video, then suppressed. "standalone"
/// evaluates one level's detections alone, "cumulative" the union of levels
/// 0..j.
template <class S>
std::vector<PyramidLayerResult> pyramid_layer_map(
    const model::TdeedModel<S>& m, const std::vector<data::SyntheticVideo>& videos,
    const PyramidEvalCfg& cfg) {
  check_contract(m.cfg().temporal_module == model::TemporalModule::sgp_pyramid,
                 "pyramid evaluation needs the pyramid variant");
  const int L = m.cfg().L;
  const int levels = m.cfg().B + 1;
  std::vector<std::vector<SpottedEvent>> per_level(levels);
  std::vector<VideoAnnotations> gt;

  for (const auto& v : videos) {
    gt.push_back(v.ann);
    check_contract(v.ann.length >= L, "pyramid evaluation: video shorter than a clip");
    std::vector<int> starts;
    for (int s = 0; s + L <= v.ann.length; s += L) starts.push_back(s);
    if (starts.back() != v.ann.length - L) starts.push_back(v.ann.length - L);
    for (const int start : starts) {
      typename model::TdeedModel<S>::Cache cache;
      const auto preds = m.pyramid_forward(v.clip(start, L).template cast<S>(), cache);
      int stride = 1;
      for (int j = 0; j < levels; ++j) {
        auto cands = decode_scaled(preds[j], v.ann.video_id, start, stride,
                                   v.ann.length, cfg.threshold);
        per_level[j].insert(per_level[j].end(), cands.begin(), cands.end());
        stride *= m.cfg().k;
      }
    }
  }

  std::vector<PyramidLayerResult> out;
  std::vector<SpottedEvent> cumulative;
  for (int j = 0; j < levels; ++j) {
    PyramidLayerResult r;
    r.layer = j;
    const auto alone = infer::soft_nms(per_level[j], cfg.window,
                                       infer::SnmsMode::linear, 1.0,
                                       cfg.final_threshold);
    r.standalone_map = map_at(alone, gt, m.cfg().C, cfg.delta);
    cumulative.insert(cumulative.end(), per_level[j].begin(), per_level[j].end());
    const auto acc = infer::soft_nms(cumulative, cfg.window,
                                     infer::SnmsMode::linear, 1.0,
                                     cfg.final_threshold);
    r.cumulative_map = map_at(acc, gt, m.cfg().C, cfg.delta);
    out.push_back(r);
  }
  return out;
}

}  // namespace tdeed::eval
