// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "gradcheck.hpp"
#include "tdeed/core/rng.hpp"
#include "tdeed/core/types.hpp"
#include "tdeed/nn/attention.hpp"
#include "tdeed/nn/conv2d.hpp"
#include "tdeed/nn/dwconv1d.hpp"
#include "tdeed/nn/ffn.hpp"
#include "tdeed/nn/gru.hpp"
#include "tdeed/nn/interp.hpp"
#include "tdeed/nn/linear.hpp"
#include "tdeed/nn/norms.hpp"
#include "tdeed/nn/softmax.hpp"

using namespace tdeed;
using gradcheck::random_mat;
using gradcheck::random_weights;

namespace {
// Weighted-sum loss over a module output makes dL/dy the weight matrix,
// which exercises the backward path with a dense, non-degenerate cotangent.
double weighted(const MatX<double>& y, const MatX<double>& w) {
  return (y.array() * w.array()).sum();
}
}  // namespace

TEST_CASE("linear layer gradients match finite differences") {
  Rng rng(11);
  nn::Linear<double> lin(5, 3);
  lin.init(rng);
  nn::ParamRegistry<double> reg;
  lin.register_params(reg, "lin");

  MatX<double> x = random_mat(rng, 5, 7);
  MatX<double> w = random_mat(rng, 3, 7);
  auto loss = [&] {
    typename nn::Linear<double>::Cache c;
    return weighted(lin.forward(x, c), w);
  };

  typename nn::Linear<double>::Cache c;
  lin.forward(x, c);
  nn::GradVec<double> g = reg.make_grads();
  MatX<double> gx = lin.backward(c, w, g);
  gradcheck::check_params(reg, g, loss);
  gradcheck::check_input(x, gx, loss);
}

TEST_CASE("depthwise conv gradients, including dilation and padding") {
  Rng rng(12);
  const int d = 6, L = 12, valid = 9;
  for (int dilation : {1, 3}) {
    CAPTURE(dilation);
    nn::DwConv1d<double> conv(d, 5, dilation);
    conv.init(rng);
    nn::ParamRegistry<double> reg;
    conv.register_params(reg, "conv");

    MatX<double> x = random_mat(rng, d, L);
    MatX<double> w = random_weights(rng, d, L, valid);
    auto loss = [&] {
      typename nn::DwConv1d<double>::Cache c;
      return weighted(conv.forward(x, valid, c), w);
    };

    typename nn::DwConv1d<double>::Cache c;
    conv.forward(x, valid, c);
    nn::GradVec<double> g = reg.make_grads();
    MatX<double> gx = conv.backward(c, w, g);
    gradcheck::check_params(reg, g, loss);
    gradcheck::check_input(x, gx, loss);
  }
}

TEST_CASE("layer norm gradients") {
  Rng rng(13);
  nn::LayerNorm<double> ln(6);
  nn::ParamRegistry<double> reg;
  ln.register_params(reg, "ln");

  MatX<double> x = random_mat(rng, 6, 5);
  MatX<double> w = random_mat(rng, 6, 5);
  auto loss = [&] {
    typename nn::LayerNorm<double>::Cache c;
    return weighted(ln.forward(x, c), w);
  };

  typename nn::LayerNorm<double>::Cache c;
  ln.forward(x, c);
  nn::GradVec<double> g = reg.make_grads();
  MatX<double> gx = ln.backward(c, w, g);
  gradcheck::check_params(reg, g, loss);
  gradcheck::check_input(x, gx, loss);
}

TEST_CASE("group norm gradients respect the valid prefix") {
  Rng rng(14);
  const int d = 8, L = 10, valid = 7;
  nn::GroupNorm1d<double> gn(d, 4);
  nn::ParamRegistry<double> reg;
  gn.register_params(reg, "gn");

  MatX<double> x = random_mat(rng, d, L);
  MatX<double> w = random_weights(rng, d, L, valid);
  auto loss = [&] {
    typename nn::GroupNorm1d<double>::Cache c;
    return weighted(gn.forward(x, valid, c), w);
  };

  typename nn::GroupNorm1d<double>::Cache c;
  gn.forward(x, valid, c);
  nn::GradVec<double> g = reg.make_grads();
  MatX<double> gx = gn.backward(c, w, g);
  gradcheck::check_params(reg, g, loss);
  gradcheck::check_input(x, gx, loss);
}

TEST_CASE("feed-forward block gradients") {
  Rng rng(15);
  nn::Ffn<double> ffn(6, 2);
  ffn.init(rng);
  nn::ParamRegistry<double> reg;
  ffn.register_params(reg, "ffn");

  MatX<double> x = random_mat(rng, 6, 5);
  MatX<double> w = random_mat(rng, 6, 5);
  auto loss = [&] {
    typename nn::Ffn<double>::Cache c;
    return weighted(ffn.forward(x, c), w);
  };

  typename nn::Ffn<double>::Cache c;
  ffn.forward(x, c);
  nn::GradVec<double> g = reg.make_grads();
  MatX<double> gx = ffn.backward(c, w, g);
  gradcheck::check_params(reg, g, loss);
  gradcheck::check_input(x, gx, loss);
}

TEST_CASE("softmax jacobian-vector product") {
  Rng rng(16);
  MatX<double> x = random_mat(rng, 5, 4);
  MatX<double> w = random_mat(rng, 5, 4);
  auto loss = [&] { return weighted(nn::softmax_cols(x), w); };
  MatX<double> y = nn::softmax_cols(x);
  MatX<double> gx = nn::softmax_cols_backward(y, w);
  gradcheck::check_input(x, gx, loss);
}

TEST_CASE("multi-head attention gradients with masked tail") {
  Rng rng(17);
  const int d = 8, L = 9, valid = 6;
  nn::MultiHeadAttention<double> mha(d, 2);
  mha.init(rng);
  nn::ParamRegistry<double> reg;
  mha.register_params(reg, "mha");

  MatX<double> x = random_mat(rng, d, L);
  for (int c = valid; c < L; ++c) x.col(c).setZero();
  MatX<double> w = random_weights(rng, d, L, valid);
  auto loss = [&] {
    typename nn::MultiHeadAttention<double>::Cache c;
    return weighted(mha.forward(x, valid, c), w);
  };

  typename nn::MultiHeadAttention<double>::Cache c;
  mha.forward(x, valid, c);
  nn::GradVec<double> g = reg.make_grads();
  MatX<double> gx = mha.backward(c, w, g);
  gradcheck::check_params(reg, g, loss);
  // Padded input columns are excluded: the mask keeps them out of the
  // forward value, so their finite difference is legitimately zero.
  MatX<double> xv = x.leftCols(valid);
  MatX<double> gxv = gx.leftCols(valid);
  auto loss_valid = [&] {
    MatX<double> full = x;
    full.leftCols(valid) = xv;
    typename nn::MultiHeadAttention<double>::Cache cc;
    return weighted(mha.forward(full, valid, cc), w);
  };
  gradcheck::check_input(xv, gxv, loss_valid);
}

TEST_CASE("gru gradients in both directions") {
  Rng rng(18);
  const int in = 5, hid = 4, L = 7, valid = 6;
  for (bool reversed : {false, true}) {
    CAPTURE(reversed);
    nn::Gru<double> gru(in, hid, reversed);
    gru.init(rng);
    nn::ParamRegistry<double> reg;
    gru.register_params(reg, "gru");

    MatX<double> x = random_mat(rng, in, L);
    MatX<double> w = random_weights(rng, hid, L, valid);
    auto loss = [&] {
      typename nn::Gru<double>::Cache c;
      return weighted(gru.forward(x, valid, c), w);
    };

    typename nn::Gru<double>::Cache c;
    gru.forward(x, valid, c);
    nn::GradVec<double> g = reg.make_grads();
    MatX<double> gx = gru.backward(c, w, g);
    gradcheck::check_params(reg, g, loss);
    gradcheck::check_input(x, gx, loss);
  }
}

TEST_CASE("strided conv2d gradients") {
  Rng rng(19);
  const int cin = 2, cout = 3, hw = 6, len = 2;
  nn::Conv2d<double> conv(cin, cout, 3, 2, 1);
  conv.init(rng);
  nn::ParamRegistry<double> reg;
  conv.register_params(reg, "conv");

  FeatureMapSeq<double> x = FeatureMapSeq<double>::zeros(cin, hw, hw, len);
  x.m = random_mat(rng, cin, hw * hw * len);

  typename nn::Conv2d<double>::Cache c0;
  FeatureMapSeq<double> y0 = conv.forward(x, c0);
  FeatureMapSeq<double> w = y0;
  w.m = random_mat(rng, y0.m.rows(), y0.m.cols());

  auto loss = [&] {
    typename nn::Conv2d<double>::Cache c;
    return weighted(conv.forward(x, c).m, w.m);
  };

  nn::GradVec<double> g = reg.make_grads();
  FeatureMapSeq<double> gx = conv.backward(c0, w, g);
  gradcheck::check_params(reg, g, loss);
  gradcheck::check_input(x.m, gx.m, loss);
}

TEST_CASE("temporal max pool routes gradient to the argmax source") {
  Rng rng(20);
  const int d = 5, L = 8, valid = 7, k = 2;
  TokenSeq<double> x{random_mat(rng, d, L), valid, 0};

  nn::PoolCache<double> pc;
  TokenSeq<double> y = temporal_pool(x, k, pc);
  CHECK(y.valid == 4);
  MatX<double> w = random_mat(rng, d, y.x.cols());
  for (int c = y.valid; c < y.x.cols(); ++c) w.col(c).setZero();

  auto loss = [&] {
    nn::PoolCache<double> c;
    TokenSeq<double> out = temporal_pool(x, k, c);
    return (out.x.array() * w.array()).sum();
  };
  MatX<double> gx = temporal_pool_backward(pc, w);
  gradcheck::check_input(x.x, gx, loss, 1e-6);
}

TEST_CASE("linear upsampling gradients") {
  Rng rng(21);
  const int d = 4, Lin = 6, vin = 5, Lout = 12, vout = 9;
  TokenSeq<double> z{random_mat(rng, d, Lin), vin, 1};

  nn::UpsampleCache<double> uc;
  TokenSeq<double> y = upsample_linear(z, Lout, vout, uc);
  CHECK(y.valid == vout);
  MatX<double> w = random_weights(rng, d, Lout, vout);

  auto loss = [&] {
    nn::UpsampleCache<double> c;
    return (upsample_linear(z, Lout, vout, c).x.array() * w.array()).sum();
  };
  MatX<double> gz = upsample_linear_backward(uc, w);
  gradcheck::check_input(z.x, gz, loss);
}
