// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <string>

#include "tdeed/core/errors.hpp"
#include "tdeed/core/types.hpp"
#include "tdeed/nn/activations.hpp"
#include "tdeed/nn/param.hpp"

namespace tdeed::nn {

enum class ShiftMode { GSM, GSF };

/// Test hooks: replace the learned sigmoid gate (or GSF fusion weight) with
/// an exact constant so the identity/shift contracts can be asserted without
/// tolerance.
enum class GateOverride { none, closed, open };

/// Gated temporal channel shift over a feature-map sequence. The first
/// ceil(n/2) of the n designated channels look one frame back (t-1), the
/// rest one frame ahead (t+1); clip edges see zeros. A per-channel affine
/// of the activation drives a per-pixel sigmoid gate that blends shifted
/// and resident features. GSF additionally blends that mix with the
/// untouched input through a learnable per-channel weight.
template <class S>
class GateShift {
 public:
  struct Cache {
    MatX<S> x;        // shifted-channel rows only, n x (len*h*w)
    MatX<S> shifted;  // same shape
    MatX<S> gate;     // same shape
    VecX<S> alpha;    // n, GSF fusion weight after sigmoid
    int h = 0, w = 0, len = 0;
  };

  GateShift() = default;
  GateShift(int channels, double fraction, ShiftMode mode)
      : channels_(channels), mode_(mode) {
    check_config(fraction > 0.0 && fraction <= 1.0,
                 "gate shift: fraction must lie in (0, 1]");
    n_shift_ = static_cast<int>(std::lround(fraction * channels));
    check_config(n_shift_ >= 1, "gate shift: fraction selects no channels");
    n_fwd_ = (n_shift_ + 1) / 2;
    gate_w.value = MatX<S>::Zero(n_shift_, 1);
    gate_b.value = MatX<S>::Zero(n_shift_, 1);
    if (mode_ == ShiftMode::GSF) fuse.value = MatX<S>::Zero(n_shift_, 1);
  }

  void register_params(ParamRegistry<S>& reg, const std::string& prefix) {
    reg.add(gate_w, scoped(prefix, "gate_w"));
    reg.add(gate_b, scoped(prefix, "gate_b"));
    if (mode_ == ShiftMode::GSF) reg.add(fuse, scoped(prefix, "fuse"));
  }

  int shifted_channels() const { return n_shift_; }

  FeatureMapSeq<S> forward(const FeatureMapSeq<S>& x, Cache& c) const {
    check_contract(x.channels == channels_, "gate shift: channel mismatch");
    const int px = x.h * x.w;
    const int n = n_shift_;
    c.h = x.h;
    c.w = x.w;
    c.len = x.len;
    c.x = x.m.topRows(n);
    c.shifted = MatX<S>::Zero(n, x.m.cols());
    for (int t = 0; t < x.len; ++t) {
      if (t >= 1)
        c.shifted.block(0, t * px, n_fwd_, px) =
            c.x.block(0, (t - 1) * px, n_fwd_, px);
      if (t + 1 < x.len)
        c.shifted.block(n_fwd_, t * px, n - n_fwd_, px) =
            c.x.block(n_fwd_, (t + 1) * px, n - n_fwd_, px);
    }

    if (gate_override == GateOverride::closed)
      c.gate = MatX<S>::Zero(n, x.m.cols());
    else if (gate_override == GateOverride::open)
      c.gate = MatX<S>::Ones(n, x.m.cols());
    else
      c.gate = sigmoid<S>(((c.x.array().colwise() * gate_w.value.col(0).array())
                               .colwise() +
                           gate_b.value.col(0).array())
                              .matrix());

    c.alpha = VecX<S>::Ones(n);
    if (mode_ == ShiftMode::GSF && fuse_override == GateOverride::none)
      c.alpha = sigmoid<S>(fuse.value).col(0);
    // fuse_override==open pins alpha to 1 ("shifted stream only"); closed
    // pins it to 0, making GSF a bypass.
    if (mode_ == ShiftMode::GSF && fuse_override == GateOverride::closed)
      c.alpha.setZero();

    FeatureMapSeq<S> y = x;
    MatX<S> mix = c.gate.array() * c.shifted.array() +
                  (S(1) - c.gate.array()) * c.x.array();
    y.m.topRows(n) =
        (mix.array().colwise() * c.alpha.array() +
         c.x.array().colwise() * (S(1) - c.alpha.array()))
            .matrix();
    return y;
  }

  FeatureMapSeq<S> backward(const Cache& c, const FeatureMapSeq<S>& gy,
                            GradVec<S>& g) const {
    const int px = c.h * c.w;
    const int n = n_shift_;
    FeatureMapSeq<S> gx = gy;
    auto gyn = gy.m.topRows(n);

    ArrXX<S> diff = c.shifted.array() - c.x.array();
    ArrXX<S> gmix = gyn.array().colwise() * c.alpha.array();

    if (mode_ == ShiftMode::GSF && fuse_override == GateOverride::none) {
      // dL/dalpha_c = sum_p gy * (mix - x); mix - x = gate * diff
      VecX<S> galpha =
          (gyn.array() * c.gate.array() * diff).rowwise().sum().matrix();
      g[fuse.id].col(0) +=
          (galpha.array() * c.alpha.array() * (S(1) - c.alpha.array())).matrix();
    }

    MatX<S> gxn =
        (gmix * (S(1) - c.gate.array()) +
         gyn.array().colwise() * (S(1) - c.alpha.array()))
            .matrix();

    if (gate_override == GateOverride::none) {
      ArrXX<S> gu = gmix * diff * c.gate.array() * (S(1) - c.gate.array());
      g[gate_w.id].col(0) += (gu * c.x.array()).rowwise().sum().matrix();
      g[gate_b.id].col(0) += gu.rowwise().sum().matrix();
      gxn.array() += gu.colwise() * gate_w.value.col(0).array();
    }

    // Transpose of the shift: forward-shifted rows send gradient to t-1,
    // backward-shifted rows to t+1.
    MatX<S> gshift = (gmix * c.gate.array()).matrix();
    for (int t = 0; t < c.len; ++t) {
      if (t >= 1)
        gxn.block(0, (t - 1) * px, n_fwd_, px) +=
            gshift.block(0, t * px, n_fwd_, px);
      if (t + 1 < c.len)
        gxn.block(n_fwd_, (t + 1) * px, n - n_fwd_, px) +=
            gshift.block(n_fwd_, t * px, n - n_fwd_, px);
    }
    gx.m.topRows(n) = gxn;
    return gx;
  }

  GateOverride gate_override = GateOverride::none;
  GateOverride fuse_override = GateOverride::none;

  Parameter<S> gate_w;
  Parameter<S> gate_b;
  Parameter<S> fuse;

 private:
  int channels_ = 0;
  int n_shift_ = 0;
  int n_fwd_ = 0;
  ShiftMode mode_ = ShiftMode::GSM;
};

}  // namespace tdeed::nn
