// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

#include "tdeed/core/rng.hpp"
#include "tdeed/core/types.hpp"

namespace tdeed::nn {

template <class S>
void fill_normal(MatX<S>& m, core::Rng& rng, double stddev) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      m(i, j) = static_cast<S>(rng.normal(0.0, stddev));
}

template <class S>
void fill_uniform(MatX<S>& m, core::Rng& rng, double lo, double hi) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      m(i, j) = static_cast<S>(rng.uniform(lo, hi));
}

/// He (Kaiming) normal for layers followed by ReLU-family activations.
template <class S>
void init_he(MatX<S>& m, core::Rng& rng, Eigen::Index fan_in) {
  fill_normal(m, rng, std::sqrt(2.0 / static_cast<double>(fan_in)));
}

/// Glorot uniform for gated/linear paths.
template <class S>
void init_xavier(MatX<S>& m, core::Rng& rng, Eigen::Index fan_in, Eigen::Index fan_out) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  fill_uniform(m, rng, -a, a);
}

}  // namespace tdeed::nn
