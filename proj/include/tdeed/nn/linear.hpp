// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "tdeed/core/rng.hpp"
#include "tdeed/core/types.hpp"
#include "tdeed/nn/init.hpp"
#include "tdeed/nn/param.hpp"

namespace tdeed::nn {

/// Dense map applied to every column of a d_in x L sequence: y = W x + b.
template <class S>
class Linear {
 public:
  struct Cache {
    MatX<S> x;
  };

  Linear() = default;
  Linear(int in, int out, bool bias = true) : in_(in), out_(out), has_bias_(bias) {
    w.value = MatX<S>::Zero(out, in);
    b.value = MatX<S>::Zero(bias ? out : 0, bias ? 1 : 0);
  }

  void init(core::Rng& rng) { init_he(w.value, rng, in_); }

  void register_params(ParamRegistry<S>& reg, const std::string& prefix) {
    reg.add(w, scoped(prefix, "w"));
    if (has_bias_) reg.add(b, scoped(prefix, "b"));
  }

  MatX<S> forward(const MatX<S>& x, Cache& c) const {
    c.x = x;
    MatX<S> y = w.value * x;
    if (has_bias_) y.colwise() += b.value.col(0);
    return y;
  }

  MatX<S> backward(const Cache& c, const MatX<S>& gy, GradVec<S>& g) const {
    g[w.id] += gy * c.x.transpose();
    if (has_bias_) g[b.id].col(0) += gy.rowwise().sum();
    return w.value.transpose() * gy;
  }

  int in_features() const { return in_; }
  int out_features() const { return out_; }

  Parameter<S> w;
  Parameter<S> b;

 private:
  int in_ = 0;
  int out_ = 0;
  bool has_bias_ = true;
};

}  // namespace tdeed::nn
