// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "tdeed/core/rng.hpp"
#include "tdeed/core/types.hpp"
#include "tdeed/nn/activations.hpp"
#include "tdeed/nn/init.hpp"
#include "tdeed/nn/param.hpp"

namespace tdeed::nn {

/// Single-direction gated recurrent unit over a d x L sequence, gate layout
/// [reset; update; candidate] stacked in the 3H-row weight blocks. Hidden
/// state starts at zero; only the first `valid` columns are processed.
template <class S>
class Gru {
 public:
  struct Cache {
    MatX<S> x;
    MatX<S> r, z, n, hn_pre, h;
    int valid = 0;
    bool reversed = false;
  };

  Gru() = default;
  Gru(int in, int hidden, bool reversed) : in_(in), hidden_(hidden), reversed_(reversed) {
    wi.value = MatX<S>::Zero(3 * hidden, in);
    wh.value = MatX<S>::Zero(3 * hidden, hidden);
    bi.value = MatX<S>::Zero(3 * hidden, 1);
    bh.value = MatX<S>::Zero(3 * hidden, 1);
  }

  void init(core::Rng& rng) {
    init_xavier(wi.value, rng, in_, hidden_);
    init_xavier(wh.value, rng, hidden_, hidden_);
  }

  void register_params(ParamRegistry<S>& reg, const std::string& prefix) {
    reg.add(wi, scoped(prefix, "wi"));
    reg.add(wh, scoped(prefix, "wh"));
    reg.add(bi, scoped(prefix, "bi"));
    reg.add(bh, scoped(prefix, "bh"));
  }

  MatX<S> forward(const MatX<S>& x, int valid, Cache& c) const {
    const int H = hidden_;
    c.x = x;
    c.valid = valid;
    c.reversed = reversed_;
    c.r = MatX<S>::Zero(H, x.cols());
    c.z = MatX<S>::Zero(H, x.cols());
    c.n = MatX<S>::Zero(H, x.cols());
    c.hn_pre = MatX<S>::Zero(H, x.cols());
    c.h = MatX<S>::Zero(H, x.cols());

    MatX<S> gi = wi.value * x.leftCols(valid);
    gi.colwise() += bi.value.col(0);

    VecX<S> h_prev = VecX<S>::Zero(H);
    for (int step = 0; step < valid; ++step) {
      const int t = reversed_ ? valid - 1 - step : step;
      VecX<S> gh = wh.value * h_prev + bh.value.col(0);
      VecX<S> r = sigmoid<S>(gi.col(t).segment(0, H) + gh.segment(0, H));
      VecX<S> z = sigmoid<S>(gi.col(t).segment(H, H) + gh.segment(H, H));
      VecX<S> hn = gh.segment(2 * H, H);
      VecX<S> n =
          (gi.col(t).segment(2 * H, H) + r.cwiseProduct(hn)).array().tanh().matrix();
      c.r.col(t) = r;
      c.z.col(t) = z;
      c.n.col(t) = n;
      c.hn_pre.col(t) = hn;
      c.h.col(t) = (VecX<S>::Ones(H) - z).cwiseProduct(n) + z.cwiseProduct(h_prev);
      h_prev = c.h.col(t);
    }
    return c.h;
  }

  MatX<S> backward(const Cache& c, const MatX<S>& gy, GradVec<S>& g) const {
    const int H = hidden_;
    const int valid = c.valid;
    MatX<S> gx = MatX<S>::Zero(c.x.rows(), c.x.cols());
    VecX<S> gh_next = VecX<S>::Zero(H);  // gradient flowing back from the future step

    for (int step = valid - 1; step >= 0; --step) {
      const int t = c.reversed ? valid - 1 - step : step;
      const int t_prev = c.reversed ? t + 1 : t - 1;
      const bool has_prev = step > 0;
      VecX<S> h_prev = has_prev ? VecX<S>(c.h.col(t_prev)) : VecX<S>::Zero(H);

      VecX<S> gh = gy.col(t) + gh_next;
      VecX<S> z = c.z.col(t), r = c.r.col(t), n = c.n.col(t), hn = c.hn_pre.col(t);

      VecX<S> gz = gh.cwiseProduct(h_prev - n);
      VecX<S> gn = gh.cwiseProduct(VecX<S>::Ones(H) - z);
      VecX<S> gh_prev = gh.cwiseProduct(z);

      VecX<S> gan = (gn.array() * (S(1) - n.array().square())).matrix();
      VecX<S> gr = gan.cwiseProduct(hn);
      VecX<S> ghn = gan.cwiseProduct(r);
      VecX<S> gaz = (gz.array() * z.array() * (S(1) - z.array())).matrix();
      VecX<S> gar = (gr.array() * r.array() * (S(1) - r.array())).matrix();

      VecX<S> ga(3 * H);
      ga << gar, gaz, gan;
      VecX<S> gpre_h(3 * H);
      gpre_h << gar, gaz, ghn;

      g[wi.id] += ga * c.x.col(t).transpose();
      g[bi.id].col(0) += ga;
      g[wh.id] += gpre_h * h_prev.transpose();
      g[bh.id].col(0) += gpre_h;

      gx.col(t) = wi.value.transpose() * ga;
      gh_next = gh_prev + wh.value.transpose() * gpre_h;
    }
    return gx;
  }

  int hidden() const { return hidden_; }

  Parameter<S> wi, wh, bi, bh;

 private:
  int in_ = 0;
  int hidden_ = 0;
  bool reversed_ = false;
};

}  // namespace tdeed::nn
