// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "tdeed/core/errors.hpp"
#include "tdeed/core/events.hpp"
#include "tdeed/model/heads.hpp"

namespace tdeed::infer {

/// Candidate ordering used by every suppression stage: higher score first,
/// then earlier frame, then lower class id.
inline bool better_candidate(const SpottedEvent& a, const SpottedEvent& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.frame != b.frame) return a.frame < b.frame;
  return a.class_id < b.class_id;
}

/// Emits one candidate per (frame, event class) whose probability exceeds
/// the threshold, relocated by the predicted displacement and clamped to the
/// video bounds. No suppression happens here; duplicates are expected.
template <class S>
std::vector<SpottedEvent> decode_candidates(const model::FramePredictions<S>& preds,
                                            const std::string& video_id,
                                            double threshold) {
  check_config(threshold >= 0.0 && threshold < 1.0,
               "threshold: must lie in [0,1)");
  const int len = preds.valid;
  std::vector<SpottedEvent> out;
  for (int l = 0; l < len; ++l) {
    const long target = std::lround(static_cast<double>(preds.disp(0, l))) + l;
    const int frame = static_cast<int>(std::clamp<long>(target, 0, len - 1));
    for (int c = 1; c < preds.class_probs.rows(); ++c) {
      const double p = static_cast<double>(preds.class_probs(c, l));
      if (p > threshold) out.push_back({video_id, frame, c, p});
    }
  }
  return out;
}

/// Hard NMS: per class, greedily keep the best remaining candidate and
/// remove every other same-class candidate within +-window frames.
/// The kept set is returned in selection (descending-score) order.
inline std::vector<SpottedEvent> nms(const std::vector<SpottedEvent>& cands,
                                     int window) {
  check_config(window >= 0, "window: must be non-negative");
  std::vector<SpottedEvent> sorted = cands;
  std::stable_sort(sorted.begin(), sorted.end(), better_candidate);
  std::vector<bool> removed(sorted.size(), false);
  std::vector<SpottedEvent> kept;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (removed[i]) continue;
    kept.push_back(sorted[i]);
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      if (removed[j] || sorted[j].class_id != sorted[i].class_id) continue;
      if (std::abs(sorted[j].frame - sorted[i].frame) <= window) removed[j] = true;
    }
  }
  return kept;
}

enum class SnmsMode { linear, gaussian };

inline SnmsMode parse_snms_mode(const std::string& s) {
  if (s == "linear") return SnmsMode::linear;
  if (s == "gaussian") return SnmsMode::gaussian;
  throw ConfigError("snms mode: expected 'linear' or 'gaussian', got '" + s + "'");
}

/// Soft-NMS engine with a caller-supplied decay. Iteratively moves the best
/// remaining candidate to the kept set, then multiplies every same-class
/// candidate within +-window by decay(|frame delta|). Kept candidates whose
/// (possibly already decayed) score falls below final_threshold are dropped
/// at the very end, so late decays still count.
inline std::vector<SpottedEvent> soft_nms_with_decay(
    const std::vector<SpottedEvent>& cands, int window,
    const std::function<double(int)>& decay, double final_threshold) {
  check_config(window >= 0, "window: must be non-negative");
  std::vector<SpottedEvent> pool = cands;
  std::vector<SpottedEvent> kept;
  kept.reserve(pool.size());
  while (!pool.empty()) {
    auto best = std::min_element(pool.begin(), pool.end(),
                                 [](const SpottedEvent& a, const SpottedEvent& b) {
                                   return better_candidate(a, b);
                                 });
    const SpottedEvent sel = *best;
    pool.erase(best);
    kept.push_back(sel);
    if (window > 0) {
      for (auto& c : pool) {
        if (c.class_id != sel.class_id) continue;
        const int df = std::abs(c.frame - sel.frame);
        if (df <= window) c.score *= decay(df);
      }
    }
  }
  std::vector<SpottedEvent> out;
  for (const auto& c : kept)
    if (c.score >= final_threshold) out.push_back(c);
  return out;
}

/// Soft-NMS per the configured decay law. window=0 disables decay entirely
/// (only the final threshold applies), since a 0-frame window reaches no
/// neighbors.
inline std::vector<SpottedEvent> soft_nms(const std::vector<SpottedEvent>& cands,
                                          int window, SnmsMode mode, double sigma,
                                          double final_threshold) {
  if (mode == SnmsMode::gaussian)
    check_config(sigma > 0.0, "sigma: must be positive for gaussian decay");
  std::function<double(int)> decay;
  if (mode == SnmsMode::linear)
    decay = [window](int df) {
      return 1.0 - static_cast<double>(window - df + 1) / (window + 1);
    };
  else
    decay = [sigma](int df) {
      return std::exp(-static_cast<double>(df) * df / (2.0 * sigma * sigma));
    };
  return soft_nms_with_decay(cands, window, decay, final_threshold);
}

}  // namespace tdeed::infer
