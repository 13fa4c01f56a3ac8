// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "tdeed/core/rng.hpp"
#include "tdeed/core/types.hpp"
#include "tdeed/nn/gru.hpp"
#include "tdeed/nn/linear.hpp"
#include "tdeed/nn/param.hpp"

namespace tdeed::model {

/// Bidirectional recurrent layer: forward and reversed GRU passes,
/// concatenated and projected back to the token width, with a residual
/// connection so deep stacks keep gradient flow.
template <class S>
class BiGruLayer {
 public:
  struct Cache {
    typename nn::Gru<S>::Cache c_fwd, c_bwd;
    typename nn::Linear<S>::Cache c_proj;
    int valid = 0;
  };

  BiGruLayer() = default;
  BiGruLayer(int dim, int hidden)
      : fwd(dim, hidden, false), bwd(dim, hidden, true), proj(2 * hidden, dim) {}

  void init(core::Rng& rng) {
    fwd.init(rng);
    bwd.init(rng);
    proj.init(rng);
  }

  void register_params(nn::ParamRegistry<S>& reg, const std::string& prefix) {
    fwd.register_params(reg, nn::scoped(prefix, "fwd"));
    bwd.register_params(reg, nn::scoped(prefix, "bwd"));
    proj.register_params(reg, nn::scoped(prefix, "proj"));
  }

  TokenSeq<S> forward(const TokenSeq<S>& x, Cache& c) const {
    c.valid = x.valid;
    MatX<S> hf = fwd.forward(x.x, x.valid, c.c_fwd);
    MatX<S> hb = bwd.forward(x.x, x.valid, c.c_bwd);
    MatX<S> cat(hf.rows() + hb.rows(), hf.cols());
    cat.topRows(hf.rows()) = hf;
    cat.bottomRows(hb.rows()) = hb;
    MatX<S> y = x.x + proj.forward(cat, c.c_proj);
    zero_pad_cols(y, x.valid);
    return TokenSeq<S>{std::move(y), x.valid, x.scale};
  }

  MatX<S> backward(const Cache& c, const MatX<S>& gy, nn::GradVec<S>& g) const {
    MatX<S> gyz = gy;
    zero_pad_cols(gyz, c.valid);
    MatX<S> gcat = proj.backward(c.c_proj, gyz, g);
    const Eigen::Index h = gcat.rows() / 2;
    MatX<S> gx = gyz;
    gx += fwd.backward(c.c_fwd, gcat.topRows(h), g);
    gx += bwd.backward(c.c_bwd, gcat.bottomRows(h), g);
    return gx;
  }

  nn::Gru<S> fwd, bwd;
  nn::Linear<S> proj;
};

}  // namespace tdeed::model
