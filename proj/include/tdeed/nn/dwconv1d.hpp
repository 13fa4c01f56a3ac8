// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <string>

#include "tdeed/core/errors.hpp"
#include "tdeed/core/rng.hpp"
#include "tdeed/core/types.hpp"
#include "tdeed/nn/init.hpp"
#include "tdeed/nn/param.hpp"

namespace tdeed::nn {

/// Depthwise temporal convolution over a d x L sequence. Out-of-range taps
/// clamp to the nearest valid frame (replicate padding), so a constant
/// sequence maps to a constant sequence when the taps sum to one. Columns
/// past `valid` are ignored on input and zeroed on output.
template <class S>
class DwConv1d {
 public:
  struct Cache {
    MatX<S> x;
    int valid = 0;
  };

  DwConv1d() = default;
  DwConv1d(int dim, int ks, int dilation = 1, bool bias = true)
      : dim_(dim), ks_(ks), dilation_(dilation), has_bias_(bias) {
    check_config(ks >= 1 && ks % 2 == 1, "depthwise conv: kernel size must be odd");
    check_config(dilation >= 1, "depthwise conv: dilation must be positive");
    w.value = MatX<S>::Zero(dim, ks);
    b.value = MatX<S>::Zero(bias ? dim : 0, bias ? 1 : 0);
  }

  void init(core::Rng& rng) { init_he(w.value, rng, ks_); }

  void register_params(ParamRegistry<S>& reg, const std::string& prefix) {
    reg.add(w, scoped(prefix, "w"));
    if (has_bias_) reg.add(b, scoped(prefix, "b"));
  }

  MatX<S> forward(const MatX<S>& x, int valid, Cache& c) const {
    c.x = x;
    c.valid = valid;
    const int half = (ks_ - 1) / 2;
    MatX<S> y = MatX<S>::Zero(x.rows(), x.cols());
    for (int t = 0; t < valid; ++t) {
      for (int i = 0; i < ks_; ++i) {
        const int src = std::clamp(t + (i - half) * dilation_, 0, valid - 1);
        y.col(t) += w.value.col(i).cwiseProduct(x.col(src));
      }
      if (has_bias_) y.col(t) += b.value.col(0);
    }
    return y;
  }

  MatX<S> backward(const Cache& c, const MatX<S>& gy, GradVec<S>& g) const {
    const int half = (ks_ - 1) / 2;
    MatX<S> gx = MatX<S>::Zero(gy.rows(), gy.cols());
    for (int t = 0; t < c.valid; ++t) {
      for (int i = 0; i < ks_; ++i) {
        const int src = std::clamp(t + (i - half) * dilation_, 0, c.valid - 1);
        gx.col(src) += w.value.col(i).cwiseProduct(gy.col(t));
        g[w.id].col(i) += gy.col(t).cwiseProduct(c.x.col(src));
      }
      if (has_bias_) g[b.id].col(0) += gy.col(t);
    }
    return gx;
  }

  int kernel_size() const { return ks_; }
  int dilation() const { return dilation_; }

  Parameter<S> w;
  Parameter<S> b;

 private:
  int dim_ = 0;
  int ks_ = 1;
  int dilation_ = 1;
  bool has_bias_ = true;
};

}  // namespace tdeed::nn
