// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdlib>
#include <utility>
#include <vector>

#include "tdeed/core/errors.hpp"
#include "tdeed/core/types.hpp"
#include "tdeed/model/heads.hpp"

namespace tdeed::train {

/// Per-frame supervision for one clip: soft class targets over C+1 classes
/// (row 0 = background) and signed displacement targets in frames.
template <class S>
struct ClipTargets {
  MatX<S> class_targets;  // (C+1) x L, columns sum to 1
  MatX<S> disp;           // 1 x L, zero on background frames

  template <class Other>
  ClipTargets<Other> cast() const {
    return ClipTargets<Other>{class_targets.template cast<Other>(),
                              disp.template cast<Other>()};
  }
};

template <class S>
struct LossValue {
  S total = 0;
  S classification = 0;
  S displacement = 0;
};

inline constexpr double kProbFloor = 1e-12;

/// Frame-averaged weighted cross-entropy plus squared displacement error.
/// Event classes carry weight w, background weight 1; the squared error is
/// evaluated at every frame (background displacement targets are zero).
template <class S>
LossValue<S> combined_loss(const model::FramePredictions<S>& preds,
                           const ClipTargets<S>& targets, S w) {
  const Eigen::Index L = targets.class_targets.cols();
  check_contract(preds.class_probs.cols() == L && preds.disp.cols() == L,
                 "loss: prediction/target length mismatch");
  check_contract(preds.class_probs.rows() == targets.class_targets.rows(),
                 "loss: class count mismatch");
  check_contract(preds.class_probs.allFinite() && preds.disp.allFinite(),
                 "loss: non-finite predictions");
  check_contract(targets.class_targets.allFinite() && targets.disp.allFinite(),
                 "loss: non-finite targets");

  S ce_sum = 0, se_sum = 0;
  for (Eigen::Index l = 0; l < L; ++l) {
    for (Eigen::Index cc = 0; cc < preds.class_probs.rows(); ++cc) {
      const S y = targets.class_targets(cc, l);
      if (y == S(0)) continue;
      const S p = std::max(preds.class_probs(cc, l), S(kProbFloor));
      const S wc = cc == 0 ? S(1) : w;
      ce_sum -= wc * y * std::log(p);
    }
    const S diff = preds.disp(0, l) - targets.disp(0, l);
    se_sum += diff * diff;
  }
  LossValue<S> out;
  out.classification = ce_sum / S(L);
  out.displacement = se_sum / S(L);
  out.total = out.classification + out.displacement;
  return out;
}

/// Gradients of combined_loss wrt (class_probs, disp).
template <class S>
std::pair<MatX<S>, MatX<S>> combined_loss_backward(
    const model::FramePredictions<S>& preds, const ClipTargets<S>& targets, S w) {
  const Eigen::Index L = targets.class_targets.cols();
  MatX<S> gp = MatX<S>::Zero(preds.class_probs.rows(), L);
  MatX<S> gd(1, L);
  for (Eigen::Index l = 0; l < L; ++l) {
    for (Eigen::Index cc = 0; cc < preds.class_probs.rows(); ++cc) {
      const S y = targets.class_targets(cc, l);
      if (y == S(0)) continue;
      const S p = preds.class_probs(cc, l);
      if (p < S(kProbFloor)) continue;  // clamped region: flat
      const S wc = cc == 0 ? S(1) : w;
      gp(cc, l) = -wc * y / p / S(L);
    }
    gd(0, l) = S(2) * (preds.disp(0, l) - targets.disp(0, l)) / S(L);
  }
  return {std::move(gp), std::move(gd)};
}

/// Classification-only labeling mode: every labeled frame's class spreads
/// to its +-dilation neighbors and all displacement targets are dropped.
/// Conflicts resolve toward the nearest source frame, ties toward the
/// earlier one. dilation=0 keeps the class map and still zeroes
/// displacements (the mode carries no regression signal by definition).
template <class S>
ClipTargets<S> dilate_labels(const ClipTargets<S>& targets, int dilation) {
  check_config(dilation >= 0, "dilate_labels: negative dilation");
  const Eigen::Index L = targets.class_targets.cols();
  const Eigen::Index rows = targets.class_targets.rows();
  ClipTargets<S> out;
  out.class_targets = MatX<S>::Zero(rows, L);
  out.disp = MatX<S>::Zero(1, L);

  // Source frames: non-background argmax of the incoming targets.
  std::vector<std::pair<int, int>> sources;  // (frame, class)
  for (Eigen::Index l = 0; l < L; ++l) {
    Eigen::Index best = 0;
    targets.class_targets.col(l).maxCoeff(&best);
    if (best != 0) sources.push_back({static_cast<int>(l), static_cast<int>(best)});
  }
  for (Eigen::Index l = 0; l < L; ++l) {
    int best_cls = 0, best_dist = dilation + 1, best_src = -1;
    for (const auto& [f, cls] : sources) {
      const int dist = std::abs(static_cast<int>(l) - f);
      if (dist > dilation) continue;
      if (dist < best_dist || (dist == best_dist && f < best_src)) {
        best_dist = dist;
        best_cls = cls;
        best_src = f;
      }
    }
    out.class_targets(best_cls, l) = S(1);
  }
  return out;
}

}  // namespace tdeed::train
