// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

#include "tdeed/core/types.hpp"

namespace tdeed::nn {

template <class S>
MatX<S> relu(const MatX<S>& x) {
  return x.cwiseMax(S(0));
}

template <class S>
MatX<S> relu_backward(const MatX<S>& x, const MatX<S>& gy) {
  return (x.array() > S(0)).template cast<S>() * gy.array();
}

template <class S>
S sigmoid_scalar(S v) {
  return v >= S(0) ? S(1) / (S(1) + std::exp(-v))
                   : std::exp(v) / (S(1) + std::exp(v));
}

template <class S>
MatX<S> sigmoid(const MatX<S>& x) {
  return x.unaryExpr([](S v) { return sigmoid_scalar(v); });
}

/// dL/dx from dL/dy and y = sigmoid(x).
template <class S>
MatX<S> sigmoid_backward_from_y(const MatX<S>& y, const MatX<S>& gy) {
  return (y.array() * (S(1) - y.array()) * gy.array()).matrix();
}

/// Exact (erf-based) GELU. The tanh approximation drifts enough to upset
/// double-precision finite-difference checks.
template <class S>
MatX<S> gelu(const MatX<S>& x) {
  constexpr double inv_sqrt2 = 0.7071067811865475244;
  return x.unaryExpr([](S v) {
    return static_cast<S>(0.5 * static_cast<double>(v) *
                          (1.0 + std::erf(static_cast<double>(v) * inv_sqrt2)));
  });
}

template <class S>
MatX<S> gelu_backward(const MatX<S>& x, const MatX<S>& gy) {
  constexpr double inv_sqrt2 = 0.7071067811865475244;
  constexpr double inv_sqrt2pi = 0.3989422804014326779;
  MatX<S> g = x.unaryExpr([](S v) {
    const double xv = static_cast<double>(v);
    const double cdf = 0.5 * (1.0 + std::erf(xv * inv_sqrt2));
    const double pdf = inv_sqrt2pi * std::exp(-0.5 * xv * xv);
    return static_cast<S>(cdf + xv * pdf);
  });
  return (g.array() * gy.array()).matrix();
}

template <class S>
MatX<S> tanh_act(const MatX<S>& x) {
  return x.array().tanh().matrix();
}

template <class S>
MatX<S> tanh_backward_from_y(const MatX<S>& y, const MatX<S>& gy) {
  return ((S(1) - y.array().square()) * gy.array()).matrix();
}

}  // namespace tdeed::nn
