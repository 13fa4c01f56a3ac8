// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>
#include <vector>

#include "tdeed/core/errors.hpp"
#include "tdeed/core/events.hpp"

namespace tdeed::eval {

/// Deterministic evaluation order for predictions: descending score, then
/// video id, then frame. Matching walks this order greedily.
inline bool eval_order(const SpottedEvent& a, const SpottedEvent& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.video_id != b.video_id) return a.video_id < b.video_id;
  return a.frame < b.frame;
}

/// Average precision for one class under a frame tolerance. Each prediction
/// (score-descending) matches the nearest not-yet-matched ground-truth event
/// of the same class in the same video with |frame difference| <= delta,
/// ties toward the earlier ground truth. AP integrates the precision
/// envelope over recall (all-point interpolation). A class with ground
/// truths but no predictions scores 0; with no ground truths the value is
/// defined as 0 and the caller is expected to exclude the class.
inline double average_precision(const std::vector<SpottedEvent>& preds,
                                const std::vector<VideoAnnotations>& gt,
                                int class_id, int delta) {
  check_config(delta >= 0, "delta: must be non-negative");

  struct Gt {
    const std::string* video;
    int frame;
    bool matched = false;
  };
  std::vector<Gt> gts;
  for (const auto& v : gt)
    for (const auto& e : v.events)
      if (e.class_id == class_id) gts.push_back({&v.video_id, e.frame, false});
  if (gts.empty()) return 0.0;

  std::vector<SpottedEvent> ps;
  for (const auto& p : preds)
    if (p.class_id == class_id) ps.push_back(p);
  if (ps.empty()) return 0.0;
  std::stable_sort(ps.begin(), ps.end(), eval_order);

  std::vector<bool> tp(ps.size(), false);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    int best = -1, best_dist = delta + 1;
    for (std::size_t j = 0; j < gts.size(); ++j) {
      if (gts[j].matched || *gts[j].video != ps[i].video_id) continue;
      const int dist = std::abs(gts[j].frame - ps[i].frame);
      if (dist > delta) continue;
      // Ground truths arrive in annotation (frame-sorted) order per video,
      // so strict improvement keeps the earlier one on distance ties.
      if (best < 0 || dist < best_dist) {
        best = static_cast<int>(j);
        best_dist = dist;
      }
    }
    if (best >= 0) {
      gts[best].matched = true;
      tp[i] = true;
    }
  }

  const double n_gt = static_cast<double>(gts.size());
  std::vector<double> precision(ps.size()), recall(ps.size());
  int tp_cum = 0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (tp[i]) ++tp_cum;
    precision[i] = static_cast<double>(tp_cum) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp_cum) / n_gt;
  }
  for (int i = static_cast<int>(ps.size()) - 2; i >= 0; --i)
    precision[i] = std::max(precision[i], precision[i + 1]);

  double ap = 0.0, prev_recall = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

/// Unweighted mean AP over the classes 1..C that have at least one ground
/// truth. Zero when no class has any.
inline double map_at(const std::vector<SpottedEvent>& preds,
                     const std::vector<VideoAnnotations>& gt, int num_classes,
                     int delta) {
  double sum = 0.0;
  int counted = 0;
  for (int c = 1; c <= num_classes; ++c) {
    bool has_gt = false;
    for (const auto& v : gt)
      for (const auto& e : v.events)
        if (e.class_id == c) has_gt = true;
    if (!has_gt) continue;
    sum += average_precision(preds, gt, c, delta);
    ++counted;
  }
  return counted == 0 ? 0.0 : sum / counted;
}

}  // namespace tdeed::eval
