// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#define EIGEN_DONT_PARALLELIZE 1

#include <Eigen/Dense>

namespace tdeed {

template <class Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <class Scalar>
using RowX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
template <class Scalar>
using ArrXX = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Matf = MatX<float>;
using Matd = MatX<double>;
using Vecf = VecX<float>;
using Vecd = VecX<double>;
using MatXi = MatX<int>;
using VecXi = VecX<int>;

/// A sequence of per-frame tokens. Tokens are stored one per column, so the
/// matrix is dim x len; the public contract (L x d) is the transpose view.
/// `valid` counts leading real columns; trailing columns are zero padding
/// introduced when the clip length does not divide k^B. `scale` is the
/// temporal stride exponent j (one token every k^j input frames).
template <class Scalar>
struct TokenSeq {
  MatX<Scalar> x;
  int valid = 0;
  int scale = 0;

  int dim() const { return static_cast<int>(x.rows()); }
  int len() const { return static_cast<int>(x.cols()); }

  static TokenSeq zeros(int dim, int len, int scale = 0) {
    return TokenSeq{MatX<Scalar>::Zero(dim, len), len, scale};
  }

  template <class Other>
  TokenSeq<Other> cast() const {
    return TokenSeq<Other>{x.template cast<Other>(), valid, scale};
  }
};

/// Zeroes the padded columns so that padding never leaks through pointwise
/// ops (biases, gates) into the next layer.
template <class Scalar>
inline void zero_pad_cols(MatX<Scalar>& m, int valid) {
  const int pad = static_cast<int>(m.cols()) - valid;
  if (pad > 0) m.rightCols(pad).setZero();
}

/// A clip-length stack of 2D feature maps (images are the channels==3 case).
/// Frame t occupies columns [t*h*w, (t+1)*h*w); each column holds one pixel's
/// channel vector, pixels in row-major (y*w + x) order.
template <class Scalar>
struct FeatureMapSeq {
  MatX<Scalar> m;
  int channels = 0;
  int h = 0;
  int w = 0;
  int len = 0;

  static FeatureMapSeq zeros(int channels, int h, int w, int len) {
    return FeatureMapSeq{MatX<Scalar>::Zero(channels, static_cast<Eigen::Index>(h) * w * len),
                         channels, h, w, len};
  }

  auto frame(int t) { return m.middleCols(static_cast<Eigen::Index>(t) * h * w, h * w); }
  auto frame(int t) const { return m.middleCols(static_cast<Eigen::Index>(t) * h * w, h * w); }

  template <class Other>
  FeatureMapSeq<Other> cast() const {
    return FeatureMapSeq<Other>{m.template cast<Other>(), channels, h, w, len};
  }
};

}  // namespace tdeed
