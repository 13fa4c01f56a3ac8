// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "tdeed/core/errors.hpp"
#include "tdeed/core/types.hpp"

namespace tdeed::nn {

/// Max-pool a token sequence by factor k. Allocated length must divide by k;
/// the valid prefix need not, so the bucket that straddles the valid boundary
/// takes its max over real frames only.
template <class S>
struct PoolCache {
  MatXi argmax;  // d x out_valid, source column per channel
  int in_cols = 0;
  int k = 1;
};

template <class S>
TokenSeq<S> temporal_pool(const TokenSeq<S>& x, int k, PoolCache<S>& c) {
  check_contract(k >= 1, "temporal pool: k must be positive");
  check_contract(x.x.cols() % k == 0, "temporal pool: length not divisible by k");
  const int lo = static_cast<int>(x.x.cols()) / k;
  const int vo = (x.valid + k - 1) / k;
  TokenSeq<S> y = TokenSeq<S>::zeros(static_cast<int>(x.x.rows()), lo);
  y.valid = vo;
  y.scale = x.scale + 1;
  c.argmax = MatXi::Zero(x.x.rows(), vo);
  c.in_cols = static_cast<int>(x.x.cols());
  c.k = k;
  for (int t = 0; t < vo; ++t) {
    const int lo_col = t * k;
    const int hi_col = std::min((t + 1) * k, x.valid);
    for (Eigen::Index r = 0; r < x.x.rows(); ++r) {
      int best = lo_col;
      S bestv = x.x(r, lo_col);
      for (int ccol = lo_col + 1; ccol < hi_col; ++ccol) {
        if (x.x(r, ccol) > bestv) {
          bestv = x.x(r, ccol);
          best = ccol;
        }
      }
      y.x(r, t) = bestv;
      c.argmax(r, t) = best;
    }
  }
  return y;
}

template <class S>
MatX<S> temporal_pool_backward(const PoolCache<S>& c, const MatX<S>& gy) {
  MatX<S> gx = MatX<S>::Zero(gy.rows(), c.in_cols);
  for (Eigen::Index t = 0; t < c.argmax.cols(); ++t)
    for (Eigen::Index r = 0; r < gy.rows(); ++r)
      gx(r, c.argmax(r, t)) += gy(r, t);
  return gx;
}

/// Endpoint-aligned linear upsampling of the valid prefix of z onto
/// out_valid positions inside an out_cols-wide buffer. Endpoints map to
/// endpoints; interior positions interpolate between the two nearest
/// source tokens.
template <class S>
struct UpsampleCache {
  std::vector<int> i0, i1;
  std::vector<S> w0, w1;
  int in_cols = 0;
};

template <class S>
TokenSeq<S> upsample_linear(const TokenSeq<S>& z, int out_cols, int out_valid,
                            UpsampleCache<S>& c) {
  check_contract(z.valid >= 1, "upsample: empty source");
  check_contract(out_valid >= 1 && out_valid <= out_cols, "upsample: bad extent");
  TokenSeq<S> y = TokenSeq<S>::zeros(static_cast<int>(z.x.rows()), out_cols);
  y.valid = out_valid;
  y.scale = z.scale - 1;
  c.i0.assign(out_valid, 0);
  c.i1.assign(out_valid, 0);
  c.w0.assign(out_valid, S(0));
  c.w1.assign(out_valid, S(0));
  c.in_cols = static_cast<int>(z.x.cols());
  for (int t = 0; t < out_valid; ++t) {
    double src = (out_valid == 1)
                     ? 0.0
                     : static_cast<double>(t) * (z.valid - 1) / (out_valid - 1);
    int lo = static_cast<int>(std::floor(src));
    lo = std::min(lo, z.valid - 1);
    const int hi = std::min(lo + 1, z.valid - 1);
    const S frac = static_cast<S>(src - lo);
    c.i0[t] = lo;
    c.i1[t] = hi;
    c.w0[t] = S(1) - frac;
    c.w1[t] = frac;
    y.x.col(t) = c.w0[t] * z.x.col(lo) + c.w1[t] * z.x.col(hi);
  }
  return y;
}

template <class S>
MatX<S> upsample_linear_backward(const UpsampleCache<S>& c, const MatX<S>& gy) {
  MatX<S> gz = MatX<S>::Zero(gy.rows(), c.in_cols);
  for (std::size_t t = 0; t < c.i0.size(); ++t) {
    gz.col(c.i0[t]) += c.w0[t] * gy.col(static_cast<Eigen::Index>(t));
    gz.col(c.i1[t]) += c.w1[t] * gy.col(static_cast<Eigen::Index>(t));
  }
  return gz;
}

}  // namespace tdeed::nn
