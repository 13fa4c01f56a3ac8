// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "tdeed/core/errors.hpp"
#include "tdeed/core/rng.hpp"
#include "tdeed/core/types.hpp"
#include "tdeed/nn/linear.hpp"
#include "tdeed/nn/param.hpp"

namespace tdeed::nn {

/// Multi-head self-attention over a d x L token sequence. Only the first
/// `valid` tokens attend and are attended to. `force_identity` pins the
/// attention matrix to I (each token sees itself only), which turns the
/// surrounding block into a pointwise stack; used by locality tests.
template <class S>
class MultiHeadAttention {
 public:
  struct Cache {
    typename Linear<S>::Cache cq, ck, cv, co;
    MatX<S> q, k, v;
    std::vector<MatX<S>> attn;  // per head, valid x valid
    int valid = 0;
  };

  MultiHeadAttention() = default;
  MultiHeadAttention(int dim, int heads)
      : wq(dim, dim), wk(dim, dim), wv(dim, dim), wo(dim, dim), dim_(dim), heads_(heads) {
    check_config(dim % heads == 0, "attention: dim not divisible by heads");
  }

  void init(core::Rng& rng) {
    wq.init(rng);
    wk.init(rng);
    wv.init(rng);
    wo.init(rng);
  }

  void register_params(ParamRegistry<S>& reg, const std::string& prefix) {
    wq.register_params(reg, scoped(prefix, "wq"));
    wk.register_params(reg, scoped(prefix, "wk"));
    wv.register_params(reg, scoped(prefix, "wv"));
    wo.register_params(reg, scoped(prefix, "wo"));
  }

  MatX<S> forward(const MatX<S>& x, int valid, Cache& c) const {
    const int dh = dim_ / heads_;
    const S scale = S(1) / std::sqrt(static_cast<S>(dh));
    c.valid = valid;
    c.q = wq.forward(x, c.cq);
    c.k = wk.forward(x, c.ck);
    c.v = wv.forward(x, c.cv);
    c.attn.assign(heads_, MatX<S>());

    MatX<S> mixed = MatX<S>::Zero(dim_, x.cols());
    for (int h = 0; h < heads_; ++h) {
      auto qh = c.q.block(h * dh, 0, dh, valid);
      auto kh = c.k.block(h * dh, 0, dh, valid);
      auto vh = c.v.block(h * dh, 0, dh, valid);
      if (force_identity) {
        c.attn[h] = MatX<S>::Identity(valid, valid);
        mixed.block(h * dh, 0, dh, valid) = vh;
        continue;
      }
      MatX<S> scores = (qh.transpose() * kh) * scale;  // rows = queries
      MatX<S>& a = c.attn[h];
      a.resize(valid, valid);
      for (int i = 0; i < valid; ++i) {
        RowX<S> e = (scores.row(i).array() - scores.row(i).maxCoeff()).exp();
        a.row(i) = e / e.sum();
      }
      mixed.block(h * dh, 0, dh, valid) = vh * a.transpose();
    }
    MatX<S> y = wo.forward(mixed, c.co);
    zero_pad_cols(y, valid);
    return y;
  }

  MatX<S> backward(const Cache& c, const MatX<S>& gy, GradVec<S>& g) const {
    const int dh = dim_ / heads_;
    const S scale = S(1) / std::sqrt(static_cast<S>(dh));
    const int valid = c.valid;
    MatX<S> gmixed = wo.backward(c.co, gy, g);

    MatX<S> gq = MatX<S>::Zero(dim_, gy.cols());
    MatX<S> gk = MatX<S>::Zero(dim_, gy.cols());
    MatX<S> gv = MatX<S>::Zero(dim_, gy.cols());
    for (int h = 0; h < heads_; ++h) {
      auto gmh = gmixed.block(h * dh, 0, dh, valid);
      auto vh = c.v.block(h * dh, 0, dh, valid);
      const MatX<S>& a = c.attn[h];
      if (force_identity) {
        gv.block(h * dh, 0, dh, valid) = gmh;
        continue;
      }
      gv.block(h * dh, 0, dh, valid) = gmh * a;
      MatX<S> ga = gmh.transpose() * vh;  // valid x valid, rows = queries
      MatX<S> gs(valid, valid);
      for (int i = 0; i < valid; ++i) {
        const S dot = ga.row(i).dot(a.row(i));
        gs.row(i) = a.row(i).cwiseProduct(ga.row(i)) - dot * a.row(i);
      }
      auto qh = c.q.block(h * dh, 0, dh, valid);
      auto kh = c.k.block(h * dh, 0, dh, valid);
      gq.block(h * dh, 0, dh, valid) = kh * gs.transpose() * scale;
      gk.block(h * dh, 0, dh, valid) = qh * gs * scale;
    }
    MatX<S> gx = wq.backward(c.cq, gq, g);
    gx += wk.backward(c.ck, gk, g);
    gx += wv.backward(c.cv, gv, g);
    return gx;
  }

  bool force_identity = false;

  Linear<S> wq, wk, wv, wo;

 private:
  int dim_ = 0;
  int heads_ = 1;
};

}  // namespace tdeed::nn
