// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "tdeed/core/errors.hpp"
#include "tdeed/core/rng.hpp"
#include "tdeed/core/types.hpp"
#include "tdeed/nn/init.hpp"
#include "tdeed/nn/param.hpp"

namespace tdeed::nn {

/// Spatial convolution applied frame-by-frame to a FeatureMapSeq, zero
/// padding, square kernel. Lowered to one GEMM per frame via im2col.
template <class S>
class Conv2d {
 public:
  struct Cache {
    FeatureMapSeq<S> x;
  };

  Conv2d() = default;
  Conv2d(int cin, int cout, int ks, int stride, int pad, bool bias = true)
      : cin_(cin), cout_(cout), ks_(ks), stride_(stride), pad_(pad), has_bias_(bias) {
    check_config(ks >= 1 && stride >= 1 && pad >= 0, "conv2d: bad geometry");
    w.value = MatX<S>::Zero(cout, cin * ks * ks);
    b.value = MatX<S>::Zero(bias ? cout : 0, bias ? 1 : 0);
  }

  void init(core::Rng& rng) { init_he(w.value, rng, cin_ * ks_ * ks_); }

  void register_params(ParamRegistry<S>& reg, const std::string& prefix) {
    reg.add(w, scoped(prefix, "w"));
    if (has_bias_) reg.add(b, scoped(prefix, "b"));
  }

  int out_extent(int in) const { return (in + 2 * pad_ - ks_) / stride_ + 1; }

  FeatureMapSeq<S> forward(const FeatureMapSeq<S>& x, Cache& c) const {
    check_contract(x.channels == cin_, "conv2d: channel mismatch");
    c.x = x;
    const int ho = out_extent(x.h), wo = out_extent(x.w);
    FeatureMapSeq<S> y = FeatureMapSeq<S>::zeros(cout_, ho, wo, x.len);
    MatX<S> patches(cin_ * ks_ * ks_, ho * wo);
    for (int t = 0; t < x.len; ++t) {
      im2col(x, t, patches);
      MatX<S> yf = w.value * patches;
      if (has_bias_) yf.colwise() += b.value.col(0);
      y.m.middleCols(t * ho * wo, ho * wo) = yf;
    }
    return y;
  }

  FeatureMapSeq<S> backward(const Cache& c, const FeatureMapSeq<S>& gy,
                            GradVec<S>& g) const {
    const FeatureMapSeq<S>& x = c.x;
    const int ho = gy.h, wo = gy.w;
    FeatureMapSeq<S> gx = FeatureMapSeq<S>::zeros(x.channels, x.h, x.w, x.len);
    MatX<S> patches(cin_ * ks_ * ks_, ho * wo);
    for (int t = 0; t < x.len; ++t) {
      auto gyf = gy.m.middleCols(t * ho * wo, ho * wo);
      im2col(x, t, patches);
      g[w.id] += gyf * patches.transpose();
      if (has_bias_) g[b.id].col(0) += gyf.rowwise().sum();
      MatX<S> gpatch = w.value.transpose() * gyf;
      col2im(gpatch, t, gx);
    }
    return gx;
  }

  Parameter<S> w;
  Parameter<S> b;

 private:
  void im2col(const FeatureMapSeq<S>& x, int t, MatX<S>& patches) const {
    const int ho = out_extent(x.h), wo = out_extent(x.w);
    patches.setZero();
    for (int oy = 0; oy < ho; ++oy) {
      for (int ox = 0; ox < wo; ++ox) {
        const int col = oy * wo + ox;
        for (int ky = 0; ky < ks_; ++ky) {
          const int iy = oy * stride_ - pad_ + ky;
          if (iy < 0 || iy >= x.h) continue;
          for (int kx = 0; kx < ks_; ++kx) {
            const int ix = ox * stride_ - pad_ + kx;
            if (ix < 0 || ix >= x.w) continue;
            patches.col(col).segment((ky * ks_ + kx) * cin_, cin_) =
                x.m.col(t * x.h * x.w + iy * x.w + ix);
          }
        }
      }
    }
  }

  void col2im(const MatX<S>& gpatch, int t, FeatureMapSeq<S>& gx) const {
    const int ho = out_extent(gx.h), wo = out_extent(gx.w);
    for (int oy = 0; oy < ho; ++oy) {
      for (int ox = 0; ox < wo; ++ox) {
        const int col = oy * wo + ox;
        for (int ky = 0; ky < ks_; ++ky) {
          const int iy = oy * stride_ - pad_ + ky;
          if (iy < 0 || iy >= gx.h) continue;
          for (int kx = 0; kx < ks_; ++kx) {
            const int ix = ox * stride_ - pad_ + kx;
            if (ix < 0 || ix >= gx.w) continue;
            gx.m.col(t * gx.h * gx.w + iy * gx.w + ix) +=
                gpatch.col(col).segment((ky * ks_ + kx) * cin_, cin_);
          }
        }
      }
    }
  }

  int cin_ = 0, cout_ = 0, ks_ = 1, stride_ = 1, pad_ = 0;
  bool has_bias_ = true;
};

}  // namespace tdeed::nn

// Patch row layout is (ky, kx, channel) fastest-varying channel, matching
// the column slices taken from FeatureMapSeq. The weight matrix uses the
// same layout, so checkpoints are portable across machines.
