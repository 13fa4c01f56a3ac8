// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "tdeed/core/rng.hpp"
#include "tdeed/core/types.hpp"
#include "tdeed/nn/activations.hpp"
#include "tdeed/nn/linear.hpp"
#include "tdeed/nn/param.hpp"

namespace tdeed::nn {

/// Two-layer token MLP with GELU, the feed-forward tail shared by the
/// temporal layers.
template <class S>
class Ffn {
 public:
  struct Cache {
    typename Linear<S>::Cache c1, c2;
    MatX<S> h;  // pre-activation
  };

  Ffn() = default;
  Ffn(int dim, int expansion) : fc1(dim, dim * expansion), fc2(dim * expansion, dim) {}

  void init(core::Rng& rng) {
    fc1.init(rng);
    fc2.init(rng);
  }

  void register_params(ParamRegistry<S>& reg, const std::string& prefix) {
    fc1.register_params(reg, scoped(prefix, "fc1"));
    fc2.register_params(reg, scoped(prefix, "fc2"));
  }

  MatX<S> forward(const MatX<S>& x, Cache& c) const {
    c.h = fc1.forward(x, c.c1);
    return fc2.forward(gelu(c.h), c.c2);
  }

  MatX<S> backward(const Cache& c, const MatX<S>& gy, GradVec<S>& g) const {
    MatX<S> ga = fc2.backward(c.c2, gy, g);
    return fc1.backward(c.c1, gelu_backward(c.h, ga), g);
  }

  Linear<S> fc1, fc2;
};

}  // namespace tdeed::nn
