// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <vector>

#include "tdeed/core/errors.hpp"
#include "tdeed/core/types.hpp"
#include "tdeed/nn/param.hpp"

namespace tdeed::train {

struct AdamWCfg {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-2;  // decoupled
  double grad_clip = 0.0;      // global norm; 0 disables
};

/// Adam with decoupled weight decay over a parameter registry. Moment
/// buffers are keyed by parameter id, so the optimizer state can be
/// serialized next to the checkpoint for exact resume.
template <class S>
class AdamW {
 public:
  AdamW() = default;
  explicit AdamW(const nn::ParamRegistry<S>& reg, AdamWCfg cfg = {}) : cfg_(cfg) {
    m_ = reg.make_grads();
    v_ = reg.make_grads();
  }

  void step(nn::ParamRegistry<S>& reg, nn::GradVec<S>& g, double lr) {
    check_contract(g.size() == m_.size(), "optimizer: gradient count mismatch");
    ++t_;
    if (cfg_.grad_clip > 0.0) {
      double sq = 0.0;
      for (const auto& gi : g) sq += static_cast<double>(gi.squaredNorm());
      const double norm = std::sqrt(sq);
      if (norm > cfg_.grad_clip) {
        const S scale = static_cast<S>(cfg_.grad_clip / norm);
        for (auto& gi : g) gi *= scale;
      }
    }
    const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
    for (auto* p : reg.list()) {
      MatX<S>& m = m_[p->id];
      MatX<S>& v = v_[p->id];
      const MatX<S>& gi = g[p->id];
      m = static_cast<S>(cfg_.beta1) * m + static_cast<S>(1.0 - cfg_.beta1) * gi;
      v = (static_cast<S>(cfg_.beta2) * v.array() +
           static_cast<S>(1.0 - cfg_.beta2) * gi.array().square())
              .matrix();
      ArrXX<S> mhat = m.array() / static_cast<S>(bc1);
      ArrXX<S> vhat = v.array() / static_cast<S>(bc2);
      p->value.array() -=
          static_cast<S>(lr) *
          (mhat / (vhat.sqrt() + static_cast<S>(cfg_.eps)) +
           static_cast<S>(cfg_.weight_decay) * p->value.array());
    }
  }

  long long step_count() const { return t_; }
  const std::vector<MatX<S>>& moment1() const { return m_; }
  const std::vector<MatX<S>>& moment2() const { return v_; }
  std::vector<MatX<S>>& moment1() { return m_; }
  std::vector<MatX<S>>& moment2() { return v_; }
  void set_step_count(long long t) { t_ = t; }

 private:
  AdamWCfg cfg_;
  std::vector<MatX<S>> m_, v_;
  long long t_ = 0;
};

}  // namespace tdeed::train
