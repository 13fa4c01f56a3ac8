// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "tdeed/core/errors.hpp"
#include "tdeed/core/rng.hpp"
#include "tdeed/core/types.hpp"
#include "tdeed/nn/init.hpp"
#include "tdeed/nn/param.hpp"

namespace tdeed::model {

/// Learnable additive positional table, indexed purely by frame position.
template <class S>
class PositionalEncoding {
 public:
  struct Cache {
    int valid = 0;
  };

  PositionalEncoding() = default;
  PositionalEncoding(int dim, int l_max) : l_max_(l_max) {
    table.value = MatX<S>::Zero(dim, l_max);
  }

  void init(core::Rng& rng, double stddev = 0.02) {
    nn::fill_normal(table.value, rng, stddev);
  }

  void register_params(nn::ParamRegistry<S>& reg, const std::string& prefix) {
    reg.add(table, nn::scoped(prefix, "table"));
  }

  TokenSeq<S> forward(const TokenSeq<S>& x, Cache& c) const {
    check_config(x.len() <= l_max_, "positional table shorter than sequence");
    c.valid = x.valid;
    TokenSeq<S> y = x;
    y.x.leftCols(x.valid) += table.value.leftCols(x.valid);
    return y;
  }

  MatX<S> backward(const Cache& c, const MatX<S>& gy, nn::GradVec<S>& g) const {
    g[table.id].leftCols(c.valid) += gy.leftCols(c.valid);
    return gy;
  }

  nn::Parameter<S> table;

 private:
  int l_max_ = 0;
};

}  // namespace tdeed::model
