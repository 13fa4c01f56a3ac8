// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <utility>
#include <vector>

#include "gradcheck.hpp"
#include "tdeed/core/rng.hpp"
#include "tdeed/core/types.hpp"
#include "tdeed/model/gru_stack.hpp"
#include "tdeed/model/heads.hpp"
#include "tdeed/model/positional.hpp"
#include "tdeed/model/sgp.hpp"
#include "tdeed/model/sgp_mixer.hpp"
#include "tdeed/model/tdeed.hpp"
#include "tdeed/model/transformer.hpp"
#include "tdeed/nn/gate_shift.hpp"
#include "tdeed/train/loss.hpp"

using namespace tdeed;
using gradcheck::random_mat;
using gradcheck::random_weights;

namespace {
model::SgpCfg small_sgp(int d) {
  model::SgpCfg cfg;
  cfg.d = d;
  cfg.ks = 5;
  cfg.r = 2;
  cfg.ffn_expansion = 2;
  return cfg;
}
}  // namespace

TEST_CASE("sgp layer gradients match finite differences") {
  Rng rng(31);
  const int d = 16, L = 12, valid = 9;
  model::SgpLayer<double> layer(small_sgp(d));
  layer.init(rng);
  nn::ParamRegistry<double> reg;
  layer.register_params(reg, "sgp");

  TokenSeq<double> x{random_mat(rng, d, L), valid, 0};
  MatX<double> w = random_weights(rng, d, L, valid);
  auto loss = [&] {
    typename model::SgpLayer<double>::Cache c;
    return (layer.forward(x, c).x.array() * w.array()).sum();
  };

  typename model::SgpLayer<double>::Cache c;
  layer.forward(x, c);
  nn::GradVec<double> g = reg.make_grads();
  MatX<double> gx = layer.backward(c, w, g);
  gradcheck::check_params(reg, g, loss);
  gradcheck::check_input(x.x, gx, loss);
}

TEST_CASE("decoder block gradients for every skip variant") {
  Rng rng(32);
  const int d = 16, Lz = 6, vz = 5, Ls = 12, vs = 9, k = 2;
  for (auto kind :
       {model::SkipVariant::none, model::SkipVariant::sum,
        model::SkipVariant::concat, model::SkipVariant::sgp_mixer_sum,
        model::SkipVariant::sgp_mixer}) {
    CAPTURE(model::to_string(kind));
    model::DecoderBlock<double> block(small_sgp(d), kind, k);
    block.init(rng);
    nn::ParamRegistry<double> reg;
    block.register_params(reg, "dec");

    TokenSeq<double> z{random_mat(rng, d, Lz), vz, 1};
    TokenSeq<double> skip{random_mat(rng, d, Ls), vs, 0};
    MatX<double> w = random_weights(rng, d, Ls, vs);
    auto loss = [&] {
      typename model::DecoderBlock<double>::Cache c;
      return (block.forward(z, skip, c).x.array() * w.array()).sum();
    };

    typename model::DecoderBlock<double>::Cache c;
    block.forward(z, skip, c);
    nn::GradVec<double> g = reg.make_grads();
    auto [gz, gskip] = block.backward(c, w, g);
    gradcheck::check_params(reg, g, loss);
    gradcheck::check_input(z.x, gz, loss);
    gradcheck::check_input(skip.x, gskip, loss);
  }
}

TEST_CASE("gate shift gradients for both flavors") {
  Rng rng(33);
  const int channels = 5, h = 3, w = 4, len = 4;
  for (auto mode : {nn::ShiftMode::GSM, nn::ShiftMode::GSF}) {
    CAPTURE(mode == nn::ShiftMode::GSM ? "gsm" : "gsf");
    nn::GateShift<double> gs(channels, 0.5, mode);
    nn::ParamRegistry<double> reg;
    gs.register_params(reg, "shift");
    // Zero-initialized gates sit at symmetric points; randomize so the
    // check sees generic curvature.
    for (auto* p : reg.list())
      const_cast<MatX<double>&>(p->value) =
          random_mat(rng, p->value.rows(), p->value.cols(), 0.5);

    FeatureMapSeq<double> x = FeatureMapSeq<double>::zeros(channels, h, w, len);
    x.m = random_mat(rng, channels, h * w * len);
    MatX<double> wm = random_mat(rng, channels, h * w * len);

    auto loss = [&] {
      typename nn::GateShift<double>::Cache c;
      return (gs.forward(x, c).m.array() * wm.array()).sum();
    };

    typename nn::GateShift<double>::Cache c;
    gs.forward(x, c);
    nn::GradVec<double> g = reg.make_grads();
    FeatureMapSeq<double> gy = x;
    gy.m = wm;
    FeatureMapSeq<double> gx = gs.backward(c, gy, g);
    gradcheck::check_params(reg, g, loss);
    gradcheck::check_input(x.m, gx.m, loss);
  }
}

TEST_CASE("combined loss gradients match finite differences") {
  Rng rng(34);
  const int C = 4, L = 10;
  model::FramePredictions<double> preds;
  preds.class_probs = nn::softmax_cols(random_mat(rng, C + 1, L));
  preds.disp = random_mat(rng, 1, L);
  preds.valid = L;

  train::ClipTargets<double> t;
  t.class_targets = MatX<double>::Zero(C + 1, L);
  t.disp = MatX<double>::Zero(1, L);
  for (int l = 0; l < L; ++l) {
    if (l % 3 == 0) {
      t.class_targets(1 + l % C, l) = 1.0;
      t.disp(0, l) = (l % 5) - 2.0;
    } else if (l == 4) {
      // soft target, as produced by mixup
      t.class_targets(0, l) = 0.3;
      t.class_targets(2, l) = 0.7;
    } else {
      t.class_targets(0, l) = 1.0;
    }
  }

  const double w = 5.0;
  auto loss = [&] {
    return static_cast<double>(train::combined_loss(preds, t, w).total);
  };
  auto [gp, gd] = train::combined_loss_backward(preds, t, w);
  gradcheck::check_input(preds.class_probs, gp, loss, 1e-6);
  gradcheck::check_input(preds.disp, gd, loss, 1e-6);
}

TEST_CASE("prediction head gradients through softmax") {
  Rng rng(35);
  const int d = 8, C = 3, L = 6;
  model::PredictionHead<double> head(d, C);
  head.init(rng);
  nn::ParamRegistry<double> reg;
  head.register_params(reg, "head");

  TokenSeq<double> x{random_mat(rng, d, L), L, 0};
  MatX<double> wp = random_mat(rng, C + 1, L);
  MatX<double> wd = random_mat(rng, 1, L);
  auto loss = [&] {
    typename model::PredictionHead<double>::Cache c;
    auto out = head.forward(x, c);
    return (out.class_probs.array() * wp.array()).sum() +
           (out.disp.array() * wd.array()).sum();
  };

  typename model::PredictionHead<double>::Cache c;
  head.forward(x, c);
  nn::GradVec<double> g = reg.make_grads();
  MatX<double> gx = head.backward(c, wp, wd, g);
  gradcheck::check_params(reg, g, loss);
  gradcheck::check_input(x.x, gx, loss);
}

TEST_CASE("transformer block gradients") {
  Rng rng(36);
  const int d = 8, L = 9, valid = 6;
  model::TransformerBlock<double> block(d, 2, 2);
  block.init(rng);
  nn::ParamRegistry<double> reg;
  block.register_params(reg, "t");

  TokenSeq<double> x{random_mat(rng, d, L), valid, 0};
  for (int c = valid; c < L; ++c) x.x.col(c).setZero();
  MatX<double> w = random_weights(rng, d, L, valid);
  auto loss = [&] {
    typename model::TransformerBlock<double>::Cache c;
    return (block.forward(x, c).x.array() * w.array()).sum();
  };

  typename model::TransformerBlock<double>::Cache c;
  block.forward(x, c);
  nn::GradVec<double> g = reg.make_grads();
  MatX<double> gx = block.backward(c, w, g);
  gradcheck::check_params(reg, g, loss);
  MatX<double> xv = x.x.leftCols(valid);
  MatX<double> gxv = gx.leftCols(valid);
  auto loss_valid = [&] {
    TokenSeq<double> full = x;
    full.x.leftCols(valid) = xv;
    typename model::TransformerBlock<double>::Cache cc;
    return (block.forward(full, cc).x.array() * w.array()).sum();
  };
  gradcheck::check_input(xv, gxv, loss_valid);
}

TEST_CASE("bidirectional gru layer gradients") {
  Rng rng(37);
  const int d = 6, hid = 5, L = 7, valid = 6;
  model::BiGruLayer<double> layer(d, hid);
  layer.init(rng);
  nn::ParamRegistry<double> reg;
  layer.register_params(reg, "gru");

  TokenSeq<double> x{random_mat(rng, d, L), valid, 0};
  MatX<double> w = random_weights(rng, d, L, valid);
  auto loss = [&] {
    typename model::BiGruLayer<double>::Cache c;
    return (layer.forward(x, c).x.array() * w.array()).sum();
  };

  typename model::BiGruLayer<double>::Cache c;
  layer.forward(x, c);
  nn::GradVec<double> g = reg.make_grads();
  MatX<double> gx = layer.backward(c, w, g);
  gradcheck::check_params(reg, g, loss);
  gradcheck::check_input(x.x, gx, loss);
}

TEST_CASE("positional encoding gradient hits only the valid prefix") {
  Rng rng(38);
  const int d = 6, L = 8, valid = 5;
  model::PositionalEncoding<double> pe(d, L);
  pe.init(rng);
  nn::ParamRegistry<double> reg;
  pe.register_params(reg, "pe");

  TokenSeq<double> x{random_mat(rng, d, L), valid, 0};
  MatX<double> w = random_weights(rng, d, L, valid);
  auto loss = [&] {
    typename model::PositionalEncoding<double>::Cache c;
    return (pe.forward(x, c).x.array() * w.array()).sum();
  };

  typename model::PositionalEncoding<double>::Cache c;
  pe.forward(x, c);
  nn::GradVec<double> g = reg.make_grads();
  pe.backward(c, w, g);
  gradcheck::check_params(reg, g, loss);
}

TEST_CASE("whole model gradients on a sampled parameter subset") {
  Rng rng(39);
  model::ModelCfg cfg;
  cfg.backbone.d = 32;
  cfg.sgp = small_sgp(32);
  cfg.L = 8;
  cfg.B = 2;
  cfg.k = 2;
  cfg.C = 2;
  model::TdeedModel<double> m(cfg);
  Rng init = Rng::derive(5, 0);
  m.init(init);

  FeatureMapSeq<double> clip = FeatureMapSeq<double>::zeros(3, 8, 8, cfg.L);
  for (Eigen::Index i = 0; i < clip.m.size(); ++i)
    clip.m(i) = rng.uniform();

  train::ClipTargets<double> t;
  t.class_targets = MatX<double>::Zero(cfg.C + 1, cfg.L);
  t.disp = MatX<double>::Zero(1, cfg.L);
  for (int l = 0; l < cfg.L; ++l) t.class_targets(l == 3 ? 1 : 0, l) = 1.0;
  t.disp(0, 3) = 1.0;

  auto loss = [&] {
    typename model::TdeedModel<double>::Cache c;
    auto preds = m.forward(clip, c);
    return static_cast<double>(train::combined_loss(preds, t, 5.0).total);
  };

  typename model::TdeedModel<double>::Cache c;
  auto preds = m.forward(clip, c);
  auto [gp, gd] = train::combined_loss_backward(preds, t, 5.0);
  nn::GradVec<double> g = m.params().make_grads();
  m.backward(c, gp, gd, g);

  // Full finite differences over ~50k parameters would dominate the suite;
  // two probes per tensor still visits every module in the graph.
  Rng pick(40);
  for (const auto* p : m.params().list()) {
    auto& value = const_cast<MatX<double>&>(p->value);
    for (int probe = 0; probe < 2; ++probe) {
      const auto r = static_cast<Eigen::Index>(
          pick.uniform_int(0, static_cast<int>(value.rows()) - 1));
      const auto cc = static_cast<Eigen::Index>(
          pick.uniform_int(0, static_cast<int>(value.cols()) - 1));
      const double numeric = gradcheck::fd_entry(value, r, cc, loss, 1e-5);
      const double analytic = g[p->id](r, cc);
      INFO("param ", p->name, " (", r, ",", cc, "): analytic ", analytic,
           " numeric ", numeric);
      CHECK(gradcheck::rel_err(analytic, numeric) < 2e-4);
    }
  }
}
