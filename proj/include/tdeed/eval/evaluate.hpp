// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "tdeed/core/errors.hpp"
#include "tdeed/data/generator.hpp"
#include "tdeed/eval/map.hpp"
#include "tdeed/infer/stitch.hpp"
#include "tdeed/infer/suppress.hpp"
#include "tdeed/model/tdeed.hpp"

namespace tdeed::eval {

struct EvalCfg {
  double overlap = 0.5;
  double threshold = 0.01;       // candidate emission
  std::string suppress = "snms"; // "nms" | "snms" | "none"
  int window = 3;                // +-frames; paper-style: 1 for nms, 3 for snms
  infer::SnmsMode snms_mode = infer::SnmsMode::linear;
  double sigma = 1.0;            // gaussian decay width
  double final_threshold = 0.05; // post-suppression score floor
  bool use_displacement = true;  // off reproduces the classification-only mode
};

struct EvalOutput {
  double map_d1 = 0.0;
  double map_d2 = 0.0;
  std::vector<SpottedEvent> events;
  std::vector<std::string> warnings;
};

inline std::vector<SpottedEvent> suppress_events(
    const std::vector<SpottedEvent>& cands, const EvalCfg& cfg) {
  if (cfg.suppress == "nms") return infer::nms(cands, cfg.window);
  if (cfg.suppress == "snms")
    return infer::soft_nms(cands, cfg.window, cfg.snms_mode, cfg.sigma,
                           cfg.final_threshold);
  if (cfg.suppress == "none") return cands;
  throw ConfigError("suppress: expected 'nms', 'snms' or 'none', got '" +
                    cfg.suppress + "'");
}

/// Full-video evaluation: stitch overlapping clips, decode candidates,
/// suppress, and score against the videos' own annotations at both reported
/// tolerances.
template <class S>
EvalOutput evaluate_videos(const model::TdeedModel<S>& m,
                           const std::vector<data::SyntheticVideo>& videos,
                           const EvalCfg& cfg) {
  check_contract(m.cfg().temporal_module != model::TemporalModule::sgp_pyramid,
                 "evaluate: pyramid models use their own per-layer evaluation");
  EvalOutput out;
  std::vector<VideoAnnotations> gt;
  const infer::ClipRunner runner = [&m](const FeatureMapSeq<float>& clip) {
    typename model::TdeedModel<S>::Cache cache;
    const auto p = m.forward(clip.template cast<S>(), cache);
    model::FramePredictions<float> pf;
    pf.class_probs = p.class_probs.template cast<float>();
    pf.disp = p.disp.template cast<float>();
    pf.valid = p.valid;
    return pf;
  };
  for (const auto& v : videos) {
    gt.push_back(v.ann);
    infer::StitchResult sr = infer::stitch(v, runner, m.cfg().L, cfg.overlap);
    out.warnings.insert(out.warnings.end(), sr.warnings.begin(),
                        sr.warnings.end());
    if (!cfg.use_displacement) sr.preds.disp.setZero();
    const auto cands =
        infer::decode_candidates(sr.preds, v.ann.video_id, cfg.threshold);
    const auto kept = suppress_events(cands, cfg);
    out.events.insert(out.events.end(), kept.begin(), kept.end());
  }
  out.map_d1 = map_at(out.events, gt, m.cfg().C, 1);
  out.map_d2 = map_at(out.events, gt, m.cfg().C, 2);
  return out;
}

}  // namespace tdeed::eval
