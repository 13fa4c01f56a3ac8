// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "tdeed/core/errors.hpp"
#include "tdeed/core/rng.hpp"
#include "tdeed/core/types.hpp"
#include "tdeed/nn/activations.hpp"
#include "tdeed/nn/conv2d.hpp"
#include "tdeed/nn/gate_shift.hpp"
#include "tdeed/nn/linear.hpp"
#include "tdeed/nn/norms.hpp"
#include "tdeed/nn/param.hpp"

namespace tdeed::model {

enum class BackboneVariant { tiny_desk, mf200_like, mf800_like };
enum class ShiftModuleKind { none, gsm, gsf };
enum class ShiftPlacement { all, latter_half };

struct BackboneCfg {
  BackboneVariant variant = BackboneVariant::tiny_desk;
  int d = 128;  // token width after the output projection
  ShiftModuleKind shift = ShiftModuleKind::none;
  ShiftPlacement placement = ShiftPlacement::latter_half;
  double shift_fraction = 0.25;
  bool coord_channels = true;

  std::vector<int> stage_widths() const {
    switch (variant) {
      case BackboneVariant::tiny_desk: return {16, 32, 64, 128};
      case BackboneVariant::mf200_like: return {24, 56, 152, 368};
      case BackboneVariant::mf800_like: return {64, 144, 320, 768};
    }
    return {};
  }
};

/// Four-stage strided 2D network applied per frame, with optional gated
/// temporal shift modules inside the designated stages, global average
/// pooling, and a linear projection to the token width. Four coordinate
/// channels (x, y, x^2, y^2) are appended to the input so that pooled
/// tokens retain spatial information about sprite positions.
template <class S>
class Backbone {
 public:
  struct StageCache {
    typename nn::Conv2d<S>::Cache c1, c2;
    typename nn::GroupNorm2d<S>::Cache n1, n2;
    typename nn::GateShift<S>::Cache gs;
    FeatureMapSeq<S> a1, a2;  // pre-ReLU activations
  };
  struct Cache {
    std::vector<StageCache> stages;
    typename nn::Linear<S>::Cache c_proj;
    FeatureMapSeq<S> input;  // with coord channels
    int pooled_px = 0;
  };

  Backbone() = default;
  explicit Backbone(const BackboneCfg& cfg) : cfg_(cfg) {
    const std::vector<int> w = cfg.stage_widths();
    int cin = 3 + (cfg.coord_channels ? 4 : 0);
    for (std::size_t i = 0; i < w.size(); ++i) {
      Stage st;
      st.c1 = nn::Conv2d<S>(cin, w[i], 3, 2, 1);
      st.n1 = nn::GroupNorm2d<S>(w[i], groups_for(w[i]));
      st.has_shift = stage_has_shift(static_cast<int>(i));
      if (st.has_shift)
        st.gs = nn::GateShift<S>(w[i], cfg.shift_fraction,
                                 cfg.shift == ShiftModuleKind::gsf
                                     ? nn::ShiftMode::GSF
                                     : nn::ShiftMode::GSM);
      st.c2 = nn::Conv2d<S>(w[i], w[i], 3, 1, 1);
      st.n2 = nn::GroupNorm2d<S>(w[i], groups_for(w[i]));
      stages_.push_back(std::move(st));
      cin = w[i];
    }
    proj_ = nn::Linear<S>(w.back(), cfg.d);
  }

  int num_stages() const { return static_cast<int>(stages_.size()); }

  bool stage_has_shift(int i) const {
    if (cfg_.shift == ShiftModuleKind::none) return false;
    if (cfg_.placement == ShiftPlacement::all) return true;
    const int n = static_cast<int>(cfg_.stage_widths().size());
    return i >= (n + 1) / 2;  // "latter half": index >= ceil(n/2)
  }

  /// Stages carrying a shift module; bounds the temporal receptive field.
  int shift_stage_count() const {
    int n = 0;
    for (int i = 0; i < num_stages(); ++i)
      if (stage_has_shift(i)) ++n;
    return n;
  }

  void init(core::Rng& rng) {
    for (auto& st : stages_) {
      st.c1.init(rng);
      st.c2.init(rng);
    }
    proj_.init(rng);
  }

  void register_params(nn::ParamRegistry<S>& reg, const std::string& prefix) {
    for (std::size_t i = 0; i < stages_.size(); ++i) {
      const std::string p = nn::scoped(prefix, "stage" + std::to_string(i));
      stages_[i].c1.register_params(reg, nn::scoped(p, "c1"));
      stages_[i].n1.register_params(reg, nn::scoped(p, "n1"));
      if (stages_[i].has_shift)
        stages_[i].gs.register_params(reg, nn::scoped(p, "shift"));
      stages_[i].c2.register_params(reg, nn::scoped(p, "c2"));
      stages_[i].n2.register_params(reg, nn::scoped(p, "n2"));
    }
    proj_.register_params(reg, nn::scoped(prefix, "proj"));
  }

  TokenSeq<S> forward(const FeatureMapSeq<S>& frames, Cache& c) const {
    check_contract(frames.channels == 3, "backbone: expects 3-channel frames");
    check_contract(frames.m.allFinite(), "backbone: non-finite input");
    c.input = with_coords(frames);
    c.stages.assign(stages_.size(), StageCache{});

    FeatureMapSeq<S> x = c.input;
    for (std::size_t i = 0; i < stages_.size(); ++i) {
      const Stage& st = stages_[i];
      StageCache& sc = c.stages[i];
      FeatureMapSeq<S> y = st.c1.forward(x, sc.c1);
      sc.a1 = st.n1.forward(y, sc.n1);
      y = sc.a1;
      y.m = nn::relu(y.m);
      if (st.has_shift) y = st.gs.forward(y, sc.gs);
      y = st.c2.forward(y, sc.c2);
      sc.a2 = st.n2.forward(y, sc.n2);
      y = sc.a2;
      y.m = nn::relu(y.m);
      x = std::move(y);
    }

    // Global average pool per frame, then project to token width.
    c.pooled_px = x.h * x.w;
    MatX<S> pooled(x.channels, x.len);
    for (int t = 0; t < x.len; ++t)
      pooled.col(t) = x.frame(t).rowwise().mean();
    TokenSeq<S> tokens;
    tokens.x = proj_.forward(pooled, c.c_proj);
    tokens.valid = x.len;
    tokens.scale = 0;
    return tokens;
  }

  /// No gradient for the raw frames is produced (inputs are data).
  void backward(const Cache& c, const MatX<S>& gtokens, nn::GradVec<S>& g) const {
    MatX<S> gpooled = proj_.backward(c.c_proj, gtokens, g);
    const StageCache& last = c.stages.back();
    FeatureMapSeq<S> gx =
        FeatureMapSeq<S>::zeros(last.a2.channels, last.a2.h, last.a2.w, last.a2.len);
    const S inv_px = S(1) / static_cast<S>(c.pooled_px);
    for (int t = 0; t < gx.len; ++t)
      gx.frame(t).colwise() = (gpooled.col(t) * inv_px).eval();

    for (int i = static_cast<int>(stages_.size()) - 1; i >= 0; --i) {
      const Stage& st = stages_[i];
      const StageCache& sc = c.stages[i];
      gx.m = nn::relu_backward(sc.a2.m, gx.m);
      gx = st.n2.backward(sc.n2, gx, g);
      gx = st.c2.backward(sc.c2, gx, g);
      if (st.has_shift) gx = st.gs.backward(sc.gs, gx, g);
      gx.m = nn::relu_backward(sc.a1.m, gx.m);
      gx = st.n1.backward(sc.n1, gx, g);
      gx = st.c1.backward(sc.c1, gx, g);
    }
  }

  const BackboneCfg& cfg() const { return cfg_; }

 private:
  struct Stage {
    nn::Conv2d<S> c1, c2;
    nn::GroupNorm2d<S> n1, n2;
    nn::GateShift<S> gs;
    bool has_shift = false;
  };

  static int groups_for(int channels) {
    int best = 1;
    for (int g = 1; g <= channels && g <= 8; ++g)
      if (channels % g == 0) best = g;
    return best;
  }

  FeatureMapSeq<S> with_coords(const FeatureMapSeq<S>& frames) const {
    if (!cfg_.coord_channels) return frames;
    FeatureMapSeq<S> out =
        FeatureMapSeq<S>::zeros(7, frames.h, frames.w, frames.len);
    for (int t = 0; t < frames.len; ++t)
      out.frame(t).topRows(3) = frames.frame(t);
    for (int t = 0; t < frames.len; ++t) {
      auto f = out.frame(t);
      for (int y = 0; y < frames.h; ++y) {
        for (int x = 0; x < frames.w; ++x) {
          const int p = y * frames.w + x;
          const S xn = frames.w > 1
                           ? S(2) * S(x) / S(frames.w - 1) - S(1)
                           : S(0);
          const S yn = frames.h > 1
                           ? S(2) * S(y) / S(frames.h - 1) - S(1)
                           : S(0);
          f(3, p) = xn;
          f(4, p) = yn;
          f(5, p) = xn * xn;
          f(6, p) = yn * yn;
        }
      }
    }
    return out;
  }

  BackboneCfg cfg_;
  std::vector<Stage> stages_;
  nn::Linear<S> proj_;
};

}  // namespace tdeed::model
