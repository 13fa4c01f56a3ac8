// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "tdeed/core/rng.hpp"
#include "tdeed/core/types.hpp"
#include "tdeed/nn/linear.hpp"
#include "tdeed/nn/param.hpp"
#include "tdeed/nn/softmax.hpp"

namespace tdeed::model {

/// Per-frame outputs: class_probs is (C+1) x L with columns on the
/// probability simplex (row 0 = background), disp is 1 x L signed frame
/// offsets. Only the first `valid` columns are meaningful.
template <class S>
struct FramePredictions {
  MatX<S> class_probs;
  MatX<S> disp;
  int valid = 0;
  int scale = 0;
};

/// Linear + softmax classifier and linear displacement regressor sharing
/// the same token input.
template <class S>
class PredictionHead {
 public:
  struct Cache {
    typename nn::Linear<S>::Cache c_cls, c_disp;
    MatX<S> probs;
    int valid = 0;
  };

  PredictionHead() = default;
  PredictionHead(int dim, int num_classes)
      : cls(dim, num_classes + 1), disp(dim, 1) {}

  void init(core::Rng& rng) {
    cls.init(rng);
    disp.init(rng);
  }

  void register_params(nn::ParamRegistry<S>& reg, const std::string& prefix) {
    cls.register_params(reg, nn::scoped(prefix, "cls"));
    disp.register_params(reg, nn::scoped(prefix, "disp"));
  }

  FramePredictions<S> forward(const TokenSeq<S>& tokens, Cache& c) const {
    c.valid = tokens.valid;
    MatX<S> logits = cls.forward(tokens.x, c.c_cls);
    c.probs = nn::softmax_cols(logits);
    FramePredictions<S> out;
    out.class_probs = c.probs;
    out.disp = disp.forward(tokens.x, c.c_disp);
    out.valid = tokens.valid;
    out.scale = tokens.scale;
    return out;
  }

  /// gy_probs is dL/d(probs), gy_disp dL/d(disp); both with padded columns
  /// already zeroed by the loss.
  MatX<S> backward(const Cache& c, const MatX<S>& gy_probs, const MatX<S>& gy_disp,
                   nn::GradVec<S>& g) const {
    MatX<S> glogits = nn::softmax_cols_backward(c.probs, gy_probs);
    MatX<S> gx = cls.backward(c.c_cls, glogits, g);
    gx += disp.backward(c.c_disp, gy_disp, g);
    return gx;
  }

  nn::Linear<S> cls, disp;
};

}  // namespace tdeed::model
