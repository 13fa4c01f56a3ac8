// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "tdeed/core/rng.hpp"
#include "tdeed/core/types.hpp"
#include "tdeed/nn/attention.hpp"
#include "tdeed/nn/ffn.hpp"
#include "tdeed/nn/norms.hpp"
#include "tdeed/nn/param.hpp"

namespace tdeed::model {

/// Pre-norm self-attention block: x + MHA(LN(x)), then + FFN(LN(.)).
template <class S>
class TransformerBlock {
 public:
  struct Cache {
    typename nn::LayerNorm<S>::Cache c_ln1, c_ln2;
    typename nn::MultiHeadAttention<S>::Cache c_mha;
    typename nn::Ffn<S>::Cache c_ffn;
    int valid = 0;
  };

  TransformerBlock() = default;
  TransformerBlock(int dim, int heads, int ffn_expansion)
      : ln1(dim), ln2(dim), mha(dim, heads), ffn(dim, ffn_expansion) {}

  void init(core::Rng& rng) {
    mha.init(rng);
    ffn.init(rng);
  }

  void register_params(nn::ParamRegistry<S>& reg, const std::string& prefix) {
    ln1.register_params(reg, nn::scoped(prefix, "ln1"));
    mha.register_params(reg, nn::scoped(prefix, "mha"));
    ln2.register_params(reg, nn::scoped(prefix, "ln2"));
    ffn.register_params(reg, nn::scoped(prefix, "ffn"));
  }

  TokenSeq<S> forward(const TokenSeq<S>& x, Cache& c) const {
    c.valid = x.valid;
    MatX<S> h = x.x + mha.forward(ln1.forward(x.x, c.c_ln1), x.valid, c.c_mha);
    MatX<S> f = ffn.forward(ln2.forward(h, c.c_ln2), c.c_ffn);
    zero_pad_cols(f, x.valid);
    return TokenSeq<S>{h + f, x.valid, x.scale};
  }

  MatX<S> backward(const Cache& c, const MatX<S>& gy, nn::GradVec<S>& g) const {
    MatX<S> gf = gy;
    zero_pad_cols(gf, c.valid);
    MatX<S> gln2 = ffn.backward(c.c_ffn, gf, g);
    MatX<S> gh = gf + ln2.backward(c.c_ln2, gln2, g);
    MatX<S> gmha = mha.backward(c.c_mha, gh, g);
    return gh + ln1.backward(c.c_ln1, gmha, g);
  }

  nn::LayerNorm<S> ln1, ln2;
  nn::MultiHeadAttention<S> mha;
  nn::Ffn<S> ffn;
};

}  // namespace tdeed::model
