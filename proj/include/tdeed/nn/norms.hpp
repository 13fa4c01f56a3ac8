// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "tdeed/core/errors.hpp"
#include "tdeed/core/types.hpp"
#include "tdeed/nn/param.hpp"

namespace tdeed::nn {

/// Per-token normalization over channels of a d x L sequence.
template <class S>
class LayerNorm {
 public:
  struct Cache {
    MatX<S> xhat;
    RowX<S> inv_std;
  };

  LayerNorm() = default;
  explicit LayerNorm(int dim, S eps = S(1e-5)) : dim_(dim), eps_(eps) {
    gamma.value = MatX<S>::Ones(dim, 1);
    beta.value = MatX<S>::Zero(dim, 1);
  }

  void register_params(ParamRegistry<S>& reg, const std::string& prefix) {
    reg.add(gamma, scoped(prefix, "gamma"));
    reg.add(beta, scoped(prefix, "beta"));
  }

  MatX<S> forward(const MatX<S>& x, Cache& c) const {
    const RowX<S> mu = x.colwise().mean();
    MatX<S> xc = x.rowwise() - mu;
    const RowX<S> var = xc.array().square().colwise().mean();
    c.inv_std = (var.array() + eps_).rsqrt();
    c.xhat = xc.array().rowwise() * c.inv_std.array();
    return ((c.xhat.array().colwise() * gamma.value.col(0).array()).colwise() +
            beta.value.col(0).array())
        .matrix();
  }

  MatX<S> backward(const Cache& c, const MatX<S>& gy, GradVec<S>& g) const {
    g[gamma.id].col(0) += (gy.array() * c.xhat.array()).rowwise().sum().matrix();
    g[beta.id].col(0) += gy.rowwise().sum();

    MatX<S> gxhat = gy.array().colwise() * gamma.value.col(0).array();
    const RowX<S> m1 = gxhat.colwise().mean();
    const RowX<S> m2 = (gxhat.array() * c.xhat.array()).colwise().mean();
    MatX<S> gx = gxhat;
    gx.rowwise() -= m1;
    gx -= (c.xhat.array().rowwise() * m2.array()).matrix();
    return (gx.array().rowwise() * c.inv_std.array()).matrix();
  }

  int dim() const { return dim_; }

  Parameter<S> gamma;
  Parameter<S> beta;

 private:
  int dim_ = 0;
  S eps_ = S(1e-5);
};

/// Group normalization for token sequences. Statistics pool each channel
/// group over the first `valid` columns, so padded tails never leak into
/// real frames; padded output columns are zeroed.
template <class S>
class GroupNorm1d {
 public:
  struct Cache {
    MatX<S> xhat;
    VecX<S> inv_std;  // one per group
    int valid = 0;
  };

  GroupNorm1d() = default;
  GroupNorm1d(int dim, int groups, S eps = S(1e-5))
      : dim_(dim), groups_(groups), eps_(eps) {
    check_config(dim % groups == 0, "group norm: channels not divisible by groups");
    gamma.value = MatX<S>::Ones(dim, 1);
    beta.value = MatX<S>::Zero(dim, 1);
  }

  void register_params(ParamRegistry<S>& reg, const std::string& prefix) {
    reg.add(gamma, scoped(prefix, "gamma"));
    reg.add(beta, scoped(prefix, "beta"));
  }

  MatX<S> forward(const MatX<S>& x, int valid, Cache& c) const {
    const int cpg = dim_ / groups_;
    c.valid = valid;
    c.inv_std.resize(groups_);
    c.xhat = MatX<S>::Zero(x.rows(), x.cols());
    MatX<S> y = MatX<S>::Zero(x.rows(), x.cols());
    for (int gi = 0; gi < groups_; ++gi) {
      auto blk = x.block(gi * cpg, 0, cpg, valid);
      const S mu = blk.mean();
      const S var = (blk.array() - mu).square().mean();
      const S inv = S(1) / std::sqrt(var + eps_);
      c.inv_std(gi) = inv;
      c.xhat.block(gi * cpg, 0, cpg, valid) = (blk.array() - mu) * inv;
    }
    y.leftCols(valid) =
        (c.xhat.leftCols(valid).array().colwise() * gamma.value.col(0).array())
            .colwise() +
        beta.value.col(0).array();
    return y;
  }

  MatX<S> backward(const Cache& c, const MatX<S>& gy, GradVec<S>& g) const {
    const int cpg = dim_ / groups_;
    const int valid = c.valid;
    g[gamma.id].col(0) += (gy.leftCols(valid).array() * c.xhat.leftCols(valid).array())
                              .rowwise()
                              .sum()
                              .matrix();
    g[beta.id].col(0) += gy.leftCols(valid).rowwise().sum();

    MatX<S> gx = MatX<S>::Zero(gy.rows(), gy.cols());
    for (int gi = 0; gi < groups_; ++gi) {
      MatX<S> gxhat =
          (gy.block(gi * cpg, 0, cpg, valid).array().colwise() *
           gamma.value.col(0).segment(gi * cpg, cpg).array())
              .matrix();
      auto xh = c.xhat.block(gi * cpg, 0, cpg, valid);
      const S m1 = gxhat.mean();
      const S m2 = (gxhat.array() * xh.array()).mean();
      gx.block(gi * cpg, 0, cpg, valid) =
          ((gxhat.array() - m1 - xh.array() * m2) * c.inv_std(gi)).matrix();
    }
    return gx;
  }

  Parameter<S> gamma;
  Parameter<S> beta;

 private:
  int dim_ = 0;
  int groups_ = 0;
  S eps_ = S(1e-5);
};

/// Group normalization over spatial feature maps, one statistic per frame
/// and group (channels within the group x all pixels).
template <class S>
class GroupNorm2d {
 public:
  struct Cache {
    MatX<S> xhat;   // same layout as the input map
    MatX<S> inv_std;  // groups x frames
    int h = 0, w = 0, len = 0;
  };

  GroupNorm2d() = default;
  GroupNorm2d(int channels, int groups, S eps = S(1e-5))
      : channels_(channels), groups_(groups), eps_(eps) {
    check_config(channels % groups == 0,
                 "group norm: channels not divisible by groups");
    gamma.value = MatX<S>::Ones(channels, 1);
    beta.value = MatX<S>::Zero(channels, 1);
  }

  void register_params(ParamRegistry<S>& reg, const std::string& prefix) {
    reg.add(gamma, scoped(prefix, "gamma"));
    reg.add(beta, scoped(prefix, "beta"));
  }

  FeatureMapSeq<S> forward(const FeatureMapSeq<S>& x, Cache& c) const {
    const int cpg = channels_ / groups_;
    const int px = x.h * x.w;
    c.h = x.h;
    c.w = x.w;
    c.len = x.len;
    c.inv_std = MatX<S>::Zero(groups_, x.len);
    c.xhat = MatX<S>::Zero(x.m.rows(), x.m.cols());
    FeatureMapSeq<S> y = FeatureMapSeq<S>::zeros(x.channels, x.h, x.w, x.len);
    for (int t = 0; t < x.len; ++t) {
      for (int gi = 0; gi < groups_; ++gi) {
        auto blk = x.m.block(gi * cpg, t * px, cpg, px);
        const S mu = blk.mean();
        const S var = (blk.array() - mu).square().mean();
        const S inv = S(1) / std::sqrt(var + eps_);
        c.inv_std(gi, t) = inv;
        c.xhat.block(gi * cpg, t * px, cpg, px) = (blk.array() - mu) * inv;
      }
      y.m.middleCols(t * px, px) =
          (c.xhat.middleCols(t * px, px).array().colwise() *
           gamma.value.col(0).array())
              .colwise() +
          beta.value.col(0).array();
    }
    return y;
  }

  FeatureMapSeq<S> backward(const Cache& c, const FeatureMapSeq<S>& gy,
                            GradVec<S>& g) const {
    const int cpg = channels_ / groups_;
    const int px = c.h * c.w;
    g[gamma.id].col(0) += (gy.m.array() * c.xhat.array()).rowwise().sum().matrix();
    g[beta.id].col(0) += gy.m.rowwise().sum();

    FeatureMapSeq<S> gx = FeatureMapSeq<S>::zeros(gy.channels, c.h, c.w, c.len);
    for (int t = 0; t < c.len; ++t) {
      for (int gi = 0; gi < groups_; ++gi) {
        MatX<S> gxhat = (gy.m.block(gi * cpg, t * px, cpg, px).array().colwise() *
                         gamma.value.col(0).segment(gi * cpg, cpg).array())
                            .matrix();
        auto xh = c.xhat.block(gi * cpg, t * px, cpg, px);
        const S m1 = gxhat.mean();
        const S m2 = (gxhat.array() * xh.array()).mean();
        gx.m.block(gi * cpg, t * px, cpg, px) =
            ((gxhat.array() - m1 - xh.array() * m2) * c.inv_std(gi, t)).matrix();
      }
    }
    return gx;
  }

  Parameter<S> gamma;
  Parameter<S> beta;

 private:
  int channels_ = 0;
  int groups_ = 0;
  S eps_ = S(1e-5);
};

}  // namespace tdeed::nn
