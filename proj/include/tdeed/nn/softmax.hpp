// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tdeed/core/types.hpp"

namespace tdeed::nn {

/// Column-wise softmax (one distribution per frame token).
template <class S>
MatX<S> softmax_cols(const MatX<S>& x) {
  MatX<S> y(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    VecX<S> e = (x.col(j).array() - x.col(j).maxCoeff()).exp();
    y.col(j) = e / e.sum();
  }
  return y;
}

/// dL/dx from dL/dy and y = softmax(x), column-wise.
template <class S>
MatX<S> softmax_cols_backward(const MatX<S>& y, const MatX<S>& gy) {
  MatX<S> gx(y.rows(), y.cols());
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    const S dot = y.col(j).dot(gy.col(j));
    gx.col(j) = y.col(j).cwiseProduct(gy.col(j)) - dot * y.col(j);
  }
  return gx;
}

}  // namespace tdeed::nn
