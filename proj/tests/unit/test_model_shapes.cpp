// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <string>
#include <vector>

#include "tdeed/core/rng.hpp"
#include "tdeed/core/types.hpp"
#include "tdeed/model/backbone.hpp"
#include "tdeed/model/tdeed.hpp"
#include "tdeed/nn/gate_shift.hpp"

using namespace tdeed;

namespace {

model::ModelCfg make_cfg(int d, int L, int B) {
  model::ModelCfg cfg;
  cfg.backbone.d = d;
  cfg.sgp.d = d;
  cfg.L = L;
  cfg.B = B;
  cfg.k = 2;
  cfg.C = 4;
  return cfg;
}

FeatureMapSeq<float> noise_clip(Rng& rng, int hw, int len) {
  FeatureMapSeq<float> f = FeatureMapSeq<float>::zeros(3, hw, hw, len);
  for (Eigen::Index i = 0; i < f.m.size(); ++i)
    f.m(i) = static_cast<float>(rng.uniform());
  return f;
}

long long temporal_scalar_count(const model::TdeedModel<float>& m) {
  long long n = 0;
  for (const auto* p : m.params().list()) {
    const std::string& name = p->name;
    if (name.rfind("backbone.", 0) == 0 || name.rfind("head.", 0) == 0)
      continue;
    n += p->size();
  }
  return n;
}

}  // namespace

TEST_CASE("forward restores the input length over the config grid") {
  Rng rng(61);
  for (int B : {2, 3}) {
    for (int L : {48, 96, 100}) {
      for (int d : {32, 368}) {
        CAPTURE(B);
        CAPTURE(L);
        CAPTURE(d);
        model::ModelCfg cfg = make_cfg(d, L, B);
        model::TdeedModel<float> m(cfg);
        Rng init = Rng::derive(61, 0);
        m.init(init);

        FeatureMapSeq<float> clip = noise_clip(rng, 12, L);
        typename model::TdeedModel<float>::Cache c;
        auto preds = m.forward(clip, c);

        CHECK(preds.valid == L);
        CHECK(preds.class_probs.cols() == L);
        CHECK(preds.class_probs.rows() == cfg.C + 1);
        CHECK(preds.disp.cols() == L);
        for (int l = 0; l < L; ++l) {
          CHECK(preds.class_probs.col(l).sum() ==
                doctest::Approx(1.0).epsilon(1e-5));
          CHECK(preds.class_probs.col(l).minCoeff() >= 0.0f);
        }
        CHECK(preds.disp.allFinite());
      }
    }
  }
}

TEST_CASE("internal padding matches the downsampling depth") {
  // L=100 with three stride-2 encoders needs padding to 104; the output
  // still crops back to 100 (covered above). The padded length is exposed
  // for the pyramid bookkeeping.
  model::TdeedModel<float> m(make_cfg(32, 100, 3));
  CHECK(m.padded_len() == 104);
  model::TdeedModel<float> exact(make_cfg(32, 96, 3));
  CHECK(exact.padded_len() == 96);
}

TEST_CASE("pyramid variant emits one prediction set per level") {
  Rng rng(62);
  model::ModelCfg cfg = make_cfg(32, 48, 2);
  cfg.temporal_module = model::TemporalModule::sgp_pyramid;
  model::TdeedModel<float> m(cfg);
  Rng init = Rng::derive(62, 0);
  m.init(init);

  FeatureMapSeq<float> clip = noise_clip(rng, 12, cfg.L);
  typename model::TdeedModel<float>::Cache c;
  auto levels = m.pyramid_forward(clip, c);
  REQUIRE(levels.size() == static_cast<std::size_t>(cfg.B + 1));
  CHECK(levels[0].valid == 48);
  CHECK(levels[1].valid == 24);
  CHECK(levels[2].valid == 12);
  for (const auto& lv : levels)
    for (int l = 0; l < lv.valid; ++l)
      CHECK(lv.class_probs.col(l).sum() == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("analytic parameter count matches the registry exactly") {
  for (auto skip : {model::SkipVariant::none, model::SkipVariant::concat,
                    model::SkipVariant::sgp_mixer}) {
    model::ModelCfg cfg = make_cfg(32, 48, 2);
    cfg.skip = skip;
    model::TdeedModel<float> m(cfg);
    CHECK(temporal_scalar_count(m) == model::sgp_ed_temporal_params(cfg));
  }
}

TEST_CASE("baselines are parameter-matched within ten percent") {
  model::ModelCfg cfg = make_cfg(64, 48, 2);
  model::TdeedModel<float> ed(cfg);
  const long long target = temporal_scalar_count(ed);

  model::ModelCfg tc = cfg;
  tc.temporal_module = model::TemporalModule::transformer;
  model::TdeedModel<float> tr(tc);
  const long long got_t = temporal_scalar_count(tr);
  CHECK(std::llabs(got_t - target) <= target / 10);

  model::ModelCfg gc = cfg;
  gc.temporal_module = model::TemporalModule::gru;
  model::TdeedModel<float> gr(gc);
  const long long got_g = temporal_scalar_count(gr);
  CHECK(std::llabs(got_g - target) <= target / 10);
}

TEST_CASE("identical seeds build identical models") {
  model::ModelCfg cfg = make_cfg(32, 48, 2);
  model::TdeedModel<float> a(cfg), b(cfg);
  Rng ra = Rng::derive(9, 0), rb = Rng::derive(9, 0);
  a.init(ra);
  b.init(rb);
  REQUIRE(a.params().count() == b.params().count());
  for (std::size_t i = 0; i < a.params().count(); ++i) {
    const auto* pa = a.params().list()[i];
    const auto* pb = b.params().list()[i];
    CHECK(pa->name == pb->name);
    CHECK((pa->value.array() == pb->value.array()).all());
  }
}

TEST_CASE("closed gates turn the shift into an identity") {
  Rng rng(63);
  nn::GateShift<float> gs(6, 0.5, nn::ShiftMode::GSM);
  gs.gate_override = nn::GateOverride::closed;

  FeatureMapSeq<float> x = FeatureMapSeq<float>::zeros(6, 3, 3, 4);
  for (Eigen::Index i = 0; i < x.m.size(); ++i)
    x.m(i) = static_cast<float>(rng.uniform());
  typename nn::GateShift<float>::Cache c;
  auto y = gs.forward(x, c);
  CHECK((y.m.array() == x.m.array()).all());
}

TEST_CASE("open gates replace shifted channels with their neighbors") {
  Rng rng(64);
  const int channels = 4, h = 2, w = 2, len = 3, px = h * w;
  nn::GateShift<float> gs(channels, 0.5, nn::ShiftMode::GSM);
  gs.gate_override = nn::GateOverride::open;
  // fraction 0.5 of 4 selects 2 channels: row 0 looks back, row 1 ahead.

  FeatureMapSeq<float> x = FeatureMapSeq<float>::zeros(channels, h, w, len);
  for (Eigen::Index i = 0; i < x.m.size(); ++i)
    x.m(i) = static_cast<float>(rng.uniform());
  typename nn::GateShift<float>::Cache c;
  auto y = gs.forward(x, c);

  for (int t = 0; t < len; ++t) {
    for (int p = 0; p < px; ++p) {
      const float back = t >= 1 ? x.m(0, (t - 1) * px + p) : 0.0f;
      const float ahead = t + 1 < len ? x.m(1, (t + 1) * px + p) : 0.0f;
      CHECK(y.m(0, t * px + p) == back);
      CHECK(y.m(1, t * px + p) == ahead);
      CHECK(y.m(2, t * px + p) == x.m(2, t * px + p));
      CHECK(y.m(3, t * px + p) == x.m(3, t * px + p));
    }
  }
}

TEST_CASE("closed fusion makes the gsf flavor a bypass") {
  Rng rng(65);
  nn::GateShift<float> gs(6, 0.5, nn::ShiftMode::GSF);
  gs.fuse_override = nn::GateOverride::closed;
  // Leave the inner gate learned and random: fusion alpha=0 must win.
  gs.gate_w.value.setRandom();
  gs.gate_b.value.setRandom();

  FeatureMapSeq<float> x = FeatureMapSeq<float>::zeros(6, 3, 3, 4);
  for (Eigen::Index i = 0; i < x.m.size(); ++i)
    x.m(i) = static_cast<float>(rng.uniform());
  typename nn::GateShift<float>::Cache c;
  auto y = gs.forward(x, c);
  CHECK((y.m.array() == x.m.array()).all());
}

TEST_CASE("latter-half placement shifts only the deeper stages") {
  model::BackboneCfg cfg;
  cfg.shift = model::ShiftModuleKind::gsf;
  cfg.placement = model::ShiftPlacement::latter_half;
  // tiny_desk has 4 stages; the latter half is stages 2 and 3.
  model::Backbone<float> half(cfg);
  CHECK_FALSE(half.stage_has_shift(0));
  CHECK_FALSE(half.stage_has_shift(1));
  CHECK(half.stage_has_shift(2));
  CHECK(half.stage_has_shift(3));
  CHECK(half.shift_stage_count() == 2);

  cfg.placement = model::ShiftPlacement::all;
  model::Backbone<float> all(cfg);
  CHECK(all.shift_stage_count() == 4);

  cfg.shift = model::ShiftModuleKind::none;
  model::Backbone<float> off(cfg);
  CHECK(off.shift_stage_count() == 0);
}
