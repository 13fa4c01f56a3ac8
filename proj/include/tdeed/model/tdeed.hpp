// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "tdeed/core/errors.hpp"
#include "tdeed/core/rng.hpp"
#include "tdeed/core/types.hpp"
#include "tdeed/model/backbone.hpp"
#include "tdeed/model/gru_stack.hpp"
#include "tdeed/model/heads.hpp"
#include "tdeed/model/positional.hpp"
#include "tdeed/model/sgp.hpp"
#include "tdeed/model/sgp_mixer.hpp"
#include "tdeed/model/transformer.hpp"
#include "tdeed/nn/interp.hpp"

namespace tdeed::model {

enum class TemporalModule { sgp_ed, transformer, gru, sgp_pyramid };

inline const char* to_string(TemporalModule m) {
  switch (m) {
    case TemporalModule::sgp_ed: return "sgp_ed";
    case TemporalModule::transformer: return "transformer";
    case TemporalModule::gru: return "gru";
    case TemporalModule::sgp_pyramid: return "sgp_pyramid";
  }
  return "?";
}

struct ModelCfg {
  BackboneCfg backbone;
  int L = 100;
  int B = 2;
  int k = 2;
  SgpCfg sgp;
  SkipVariant skip = SkipVariant::sgp_mixer;
  int C = 4;
  int r_E = 2;
  TemporalModule temporal_module = TemporalModule::sgp_ed;
  int heads = 4;            // transformer baseline
  int baseline_layers = 0;  // 0 = auto (2B+1, mirroring ED depth)
  int transformer_ffn = 0;  // 0 = auto param match
  int gru_hidden = 0;       // 0 = auto param match
};

// ---- Analytic parameter counts, used to size baselines fairly. ----

inline long long linear_params(int in, int out) { return 1LL * in * out + out; }
inline long long dwconv_params(int d, int ks) { return 1LL * d * ks + d; }
inline long long ffn_params(int d, int e) {
  return linear_params(d, e * d) + linear_params(e * d, d);
}
inline long long sgp_module_params(const SgpCfg& c) {
  return 2 * linear_params(c.d, c.d) + 3 * dwconv_params(c.d, c.ks);
}
inline long long sgp_layer_params(const SgpCfg& c) {
  return 2LL * c.d + sgp_module_params(c) + 2LL * c.d + ffn_params(c.d, c.ffn_expansion);
}
inline long long decoder_block_params(const SgpCfg& c, SkipVariant v) {
  long long p = sgp_layer_params(c);
  if (v == SkipVariant::concat) p += linear_params(2 * c.d, c.d);
  if (v == SkipVariant::sgp_mixer || v == SkipVariant::sgp_mixer_sum) {
    p += 4LL * c.d;  // two layer norms
    p += 4 * linear_params(c.d, c.d);
    p += 6 * dwconv_params(c.d, c.ks);
    if (v == SkipVariant::sgp_mixer) p += linear_params(6 * c.d, c.d);
  }
  return p;
}
inline long long sgp_ed_temporal_params(const ModelCfg& cfg) {
  long long p = 1LL * cfg.sgp.d * cfg.L;  // positional table
  p += (cfg.B + 1) * sgp_layer_params(cfg.sgp);
  p += cfg.B * decoder_block_params(cfg.sgp, cfg.skip);
  return p;
}
inline long long transformer_block_params(int d, int e) {
  return 4LL * d + 4 * linear_params(d, d) + ffn_params(d, e);
}
inline long long bigru_layer_params(int d, int h) {
  const long long one_dir = 3LL * h * d + 3LL * h * h + 6LL * h;
  return 2 * one_dir + linear_params(2 * h, d);
}

/// Chooses (layers, ffn_expansion) for the Transformer baseline so its
/// temporal parameter count lands as close as possible to the SGP
/// encoder-decoder's; the accepted band is +-10%.
inline std::pair<int, int> size_transformer(const ModelCfg& cfg) {
  const long long target = sgp_ed_temporal_params(cfg);
  const int d = cfg.sgp.d;
  int best_layers = 2 * cfg.B + 1, best_e = 4;
  long long best_err = -1;
  for (int layers = cfg.B + 1; layers <= 3 * cfg.B + 3; ++layers) {
    for (int e = 1; e <= 8; ++e) {
      const long long p =
          1LL * d * cfg.L + layers * transformer_block_params(d, e) + 2LL * d;
      const long long err = std::llabs(p - target);
      if (best_err < 0 || err < best_err) {
        best_err = err;
        best_layers = layers;
        best_e = e;
      }
    }
  }
  return {best_layers, best_e};
}

/// Chooses (layers, hidden) for the GRU baseline the same way.
inline std::pair<int, int> size_gru(const ModelCfg& cfg) {
  const long long target = sgp_ed_temporal_params(cfg);
  const int d = cfg.sgp.d;
  int best_layers = 2 * cfg.B + 1, best_h = d;
  long long best_err = -1;
  for (int layers = cfg.B + 1; layers <= 2 * cfg.B + 2; ++layers) {
    for (int h = 8; h <= 2 * d; h += 4) {
      const long long p = 1LL * layers * bigru_layer_params(d, h);
      const long long err = std::llabs(p - target);
      if (best_err < 0 || err < best_err) {
        best_err = err;
        best_layers = layers;
        best_h = h;
      }
    }
  }
  return {best_layers, best_h};
}

/// Named capture of the token sequence at one architectural stage.
template <class S>
struct StageHook {
  std::string name;
  TokenSeq<S> tokens;
};

/// The assembled spotting model. One instance owns all parameters; forward
/// fills a Cache that backward consumes. Training processes clips one at a
/// time and sums per-clip gradients, so instances are never shared between
/// concurrent optimization steps.
template <class S>
class TdeedModel {
 public:
  struct Cache {
    typename Backbone<S>::Cache c_bb;
    typename PositionalEncoding<S>::Cache c_pe;
    std::vector<typename SgpLayer<S>::Cache> c_enc;
    std::vector<nn::PoolCache<S>> c_pool;
    typename SgpLayer<S>::Cache c_neck;
    std::vector<typename DecoderBlock<S>::Cache> c_dec;
    std::vector<typename TransformerBlock<S>::Cache> c_tblock;
    typename nn::LayerNorm<S>::Cache c_tfinal;
    std::vector<typename BiGruLayer<S>::Cache> c_gru;
    typename PredictionHead<S>::Cache c_head;
    std::vector<typename PredictionHead<S>::Cache> c_pyr_head;
    int l_pad = 0;
  };

  explicit TdeedModel(const ModelCfg& cfg) : cfg_(cfg) {
    check_config(cfg.B >= 1, "model: B must be >= 1");
    check_config(cfg.k >= 1, "model: k must be >= 1");
    check_config(cfg.C >= 1, "model: C must be >= 1");
    check_config(cfg.r_E >= 0, "model: r_E must be >= 0");
    check_config(cfg.sgp.d == cfg.backbone.d,
                 "model: token width must match between backbone and temporal stack");
    check_config(cfg.L >= 1, "model: L must be >= 1");

    backbone = Backbone<S>(cfg.backbone);
    l_pad_ = cfg.L;
    int kb = 1;
    for (int i = 0; i < cfg.B; ++i) kb *= cfg.k;
    l_pad_ = ((cfg.L + kb - 1) / kb) * kb;

    switch (cfg.temporal_module) {
      case TemporalModule::sgp_ed: {
        pe = PositionalEncoding<S>(cfg.sgp.d, cfg.L);
        for (int i = 0; i < cfg.B; ++i) enc.emplace_back(cfg.sgp);
        neck = SgpLayer<S>(cfg.sgp);
        for (int i = 0; i < cfg.B; ++i) dec.emplace_back(cfg.sgp, cfg.skip, cfg.k);
        head = PredictionHead<S>(cfg.sgp.d, cfg.C);
        break;
      }
      case TemporalModule::transformer: {
        pe = PositionalEncoding<S>(cfg.sgp.d, cfg.L);
        auto [layers, e] = cfg.baseline_layers > 0 && cfg.transformer_ffn > 0
                               ? std::pair<int, int>{cfg.baseline_layers, cfg.transformer_ffn}
                               : size_transformer(cfg);
        for (int i = 0; i < layers; ++i)
          tblocks.emplace_back(cfg.sgp.d, cfg.heads, e);
        tfinal = nn::LayerNorm<S>(cfg.sgp.d);
        head = PredictionHead<S>(cfg.sgp.d, cfg.C);
        break;
      }
      case TemporalModule::gru: {
        auto [layers, h] = cfg.baseline_layers > 0 && cfg.gru_hidden > 0
                               ? std::pair<int, int>{cfg.baseline_layers, cfg.gru_hidden}
                               : size_gru(cfg);
        for (int i = 0; i < layers; ++i) grus.emplace_back(cfg.sgp.d, h);
        head = PredictionHead<S>(cfg.sgp.d, cfg.C);
        break;
      }
      case TemporalModule::sgp_pyramid: {
        pe = PositionalEncoding<S>(cfg.sgp.d, cfg.L);
        for (int i = 0; i < cfg.B + 1; ++i) enc.emplace_back(cfg.sgp);
        for (int i = 0; i < cfg.B + 1; ++i)
          pyr_heads.emplace_back(cfg.sgp.d, cfg.C);
        break;
      }
    }
    register_all();
  }

  const ModelCfg& cfg() const { return cfg_; }
  int padded_len() const { return l_pad_; }
  nn::ParamRegistry<S>& params() { return reg_; }
  const nn::ParamRegistry<S>& params() const { return reg_; }

  void init(core::Rng& rng) {
    backbone.init(rng);
    switch (cfg_.temporal_module) {
      case TemporalModule::sgp_ed:
        pe.init(rng);
        for (auto& l : enc) l.init(rng);
        neck.init(rng);
        for (auto& l : dec) l.init(rng);
        head.init(rng);
        break;
      case TemporalModule::transformer:
        pe.init(rng);
        for (auto& l : tblocks) l.init(rng);
        head.init(rng);
        break;
      case TemporalModule::gru:
        for (auto& l : grus) l.init(rng);
        head.init(rng);
        break;
      case TemporalModule::sgp_pyramid:
        pe.init(rng);
        for (auto& l : enc) l.init(rng);
        for (auto& h : pyr_heads) h.init(rng);
        break;
    }
  }

  /// Per-clip forward. `hooks`, when given, receives the token sequence
  /// after the backbone, after positional encoding, and after every
  /// temporal layer.
  FramePredictions<S> forward(const FeatureMapSeq<S>& frames, Cache& c,
                              std::vector<StageHook<S>>* hooks = nullptr) const {
    check_contract(cfg_.temporal_module != TemporalModule::sgp_pyramid,
                   "model: use pyramid_forward for the pyramid variant");
    check_contract(frames.len == cfg_.L, "model: clip length mismatch");
    TokenSeq<S> x = backbone.forward(frames, c.c_bb);
    if (hooks) hooks->push_back({"bb", x});

    TokenSeq<S> tokens;
    switch (cfg_.temporal_module) {
      case TemporalModule::sgp_ed: {
        x = pe.forward(x, c.c_pe);
        if (hooks) hooks->push_back({"pe", x});
        x = widen(x);
        c.c_enc.assign(enc.size(), {});
        c.c_pool.assign(enc.size(), {});
        c.c_dec.assign(dec.size(), {});
        std::vector<TokenSeq<S>> skips(enc.size());
        for (std::size_t j = 0; j < enc.size(); ++j) {
          TokenSeq<S> s = enc[j].forward(x, c.c_enc[j]);
          if (hooks) hooks->push_back({"enc" + std::to_string(j), s});
          skips[j] = s;
          x = nn::temporal_pool(s, cfg_.k, c.c_pool[j]);
        }
        x = neck.forward(x, c.c_neck);
        if (hooks) hooks->push_back({"neck", x});
        for (int j = static_cast<int>(dec.size()) - 1; j >= 0; --j) {
          x = dec[j].forward(x, skips[j], c.c_dec[j]);
          if (hooks)
            hooks->push_back(
                {"dec" + std::to_string(dec.size() - 1 - j), x});
        }
        tokens = x;
        break;
      }
      case TemporalModule::transformer: {
        x = pe.forward(x, c.c_pe);
        if (hooks) hooks->push_back({"pe", x});
        c.c_tblock.assign(tblocks.size(), {});
        for (std::size_t j = 0; j < tblocks.size(); ++j) {
          x = tblocks[j].forward(x, c.c_tblock[j]);
          if (hooks) hooks->push_back({"layer" + std::to_string(j), x});
        }
        x.x = tfinal.forward(x.x, c.c_tfinal);
        tokens = x;
        break;
      }
      case TemporalModule::gru: {
        c.c_gru.assign(grus.size(), {});
        for (std::size_t j = 0; j < grus.size(); ++j) {
          x = grus[j].forward(x, c.c_gru[j]);
          if (hooks) hooks->push_back({"layer" + std::to_string(j), x});
        }
        tokens = x;
        break;
      }
      default: break;
    }

    c.l_pad = tokens.len();
    FramePredictions<S> out = head.forward(tokens, c.c_head);
    return crop(out, cfg_.L);
  }

  /// Accumulates into g the gradient of a loss whose derivatives wrt the
  /// cropped outputs are gprobs ((C+1) x L) and gdisp (1 x L).
  void backward(const Cache& c, const MatX<S>& gprobs, const MatX<S>& gdisp,
                nn::GradVec<S>& g) const {
    MatX<S> gp = pad_cols(gprobs, c.l_pad);
    MatX<S> gd = pad_cols(gdisp, c.l_pad);
    MatX<S> gx = head.backward(c.c_head, gp, gd, g);

    switch (cfg_.temporal_module) {
      case TemporalModule::sgp_ed: {
        std::vector<MatX<S>> gskips(dec.size());
        for (std::size_t j = 0; j < dec.size(); ++j) {
          auto [gz, gskip] = dec[j].backward(c.c_dec[j], gx, g);
          gskips[j] = std::move(gskip);
          gx = std::move(gz);
        }
        gx = neck.backward(c.c_neck, gx, g);
        for (int j = static_cast<int>(enc.size()) - 1; j >= 0; --j) {
          MatX<S> gs = nn::temporal_pool_backward(c.c_pool[j], gx);
          gs += gskips[j];
          gx = enc[j].backward(c.c_enc[j], gs, g);
        }
        gx = narrow(gx);
        gx = pe.backward(c.c_pe, gx, g);
        break;
      }
      case TemporalModule::transformer: {
        gx = tfinal.backward(c.c_tfinal, gx, g);
        for (int j = static_cast<int>(tblocks.size()) - 1; j >= 0; --j)
          gx = tblocks[j].backward(c.c_tblock[j], gx, g);
        gx = pe.backward(c.c_pe, gx, g);
        break;
      }
      case TemporalModule::gru: {
        for (int j = static_cast<int>(grus.size()) - 1; j >= 0; --j)
          gx = grus[j].backward(c.c_gru[j], gx, g);
        break;
      }
      default: break;
    }
    backbone.backward(c.c_bb, gx, g);
  }

  /// Pyramid variant: encoder-only, one prediction pair per scale.
  std::vector<FramePredictions<S>> pyramid_forward(
      const FeatureMapSeq<S>& frames, Cache& c,
      std::vector<StageHook<S>>* hooks = nullptr) const {
    check_contract(cfg_.temporal_module == TemporalModule::sgp_pyramid,
                   "model: pyramid_forward requires the pyramid variant");
    check_contract(frames.len == cfg_.L, "model: clip length mismatch");
    TokenSeq<S> x = backbone.forward(frames, c.c_bb);
    if (hooks) hooks->push_back({"bb", x});
    c.l_pad = l_pad_;
    x = pe.forward(x, c.c_pe);
    if (hooks) hooks->push_back({"pe", x});
    x = widen(x);

    c.c_enc.assign(enc.size(), {});
    c.c_pool.assign(enc.size() - 1, {});
    c.c_pyr_head.assign(pyr_heads.size(), {});
    std::vector<FramePredictions<S>> out;
    for (std::size_t j = 0; j < enc.size(); ++j) {
      x = enc[j].forward(x, c.c_enc[j]);
      if (hooks) hooks->push_back({"enc" + std::to_string(j), x});
      FramePredictions<S> p = pyr_heads[j].forward(x, c.c_pyr_head[j]);
      out.push_back(crop(p, x.valid));
      if (j + 1 < enc.size()) x = nn::temporal_pool(x, cfg_.k, c.c_pool[j]);
    }
    return out;
  }

  void pyramid_backward(const Cache& c,
                        const std::vector<std::pair<MatX<S>, MatX<S>>>& grads,
                        nn::GradVec<S>& g) const {
    check_contract(grads.size() == pyr_heads.size(),
                   "model: one gradient pair per pyramid level");
    MatX<S> gx;  // gradient flowing up from the deeper level
    for (int j = static_cast<int>(enc.size()) - 1; j >= 0; --j) {
      const int cols = static_cast<int>(c.c_enc[j].c_gn.xhat.cols());
      MatX<S> gtok = pyr_heads[j].backward(c.c_pyr_head[j],
                                           pad_cols(grads[j].first, cols),
                                           pad_cols(grads[j].second, cols), g);
      if (j + 1 < static_cast<int>(enc.size()))
        gtok += nn::temporal_pool_backward(c.c_pool[j], gx);
      gx = enc[j].backward(c.c_enc[j], gtok, g);
    }
    gx = narrow(gx);
    gx = pe.backward(c.c_pe, gx, g);
    backbone.backward(c.c_bb, gx, g);
  }

  int num_temporal_layers() const {
    switch (cfg_.temporal_module) {
      case TemporalModule::sgp_ed: return 2 * cfg_.B + 1;
      case TemporalModule::transformer: return static_cast<int>(tblocks.size());
      case TemporalModule::gru: return static_cast<int>(grus.size());
      case TemporalModule::sgp_pyramid: return cfg_.B + 1;
    }
    return 0;
  }

  Backbone<S> backbone;
  PositionalEncoding<S> pe;
  std::vector<SgpLayer<S>> enc;
  SgpLayer<S> neck;
  std::vector<DecoderBlock<S>> dec;
  std::vector<TransformerBlock<S>> tblocks;
  nn::LayerNorm<S> tfinal;
  std::vector<BiGruLayer<S>> grus;
  PredictionHead<S> head;
  std::vector<PredictionHead<S>> pyr_heads;

 private:
  void register_all() {
    backbone.register_params(reg_, "backbone");
    switch (cfg_.temporal_module) {
      case TemporalModule::sgp_ed:
        pe.register_params(reg_, "pe");
        for (std::size_t i = 0; i < enc.size(); ++i)
          enc[i].register_params(reg_, "enc" + std::to_string(i));
        neck.register_params(reg_, "neck");
        for (std::size_t i = 0; i < dec.size(); ++i)
          dec[i].register_params(reg_, "dec" + std::to_string(i));
        head.register_params(reg_, "head");
        break;
      case TemporalModule::transformer:
        pe.register_params(reg_, "pe");
        for (std::size_t i = 0; i < tblocks.size(); ++i)
          tblocks[i].register_params(reg_, "layer" + std::to_string(i));
        tfinal.register_params(reg_, "final_norm");
        head.register_params(reg_, "head");
        break;
      case TemporalModule::gru:
        for (std::size_t i = 0; i < grus.size(); ++i)
          grus[i].register_params(reg_, "layer" + std::to_string(i));
        head.register_params(reg_, "head");
        break;
      case TemporalModule::sgp_pyramid:
        pe.register_params(reg_, "pe");
        for (std::size_t i = 0; i < enc.size(); ++i)
          enc[i].register_params(reg_, "enc" + std::to_string(i));
        for (std::size_t i = 0; i < pyr_heads.size(); ++i)
          pyr_heads[i].register_params(reg_, "head" + std::to_string(i));
        break;
    }
  }

  TokenSeq<S> widen(const TokenSeq<S>& x) const {
    if (x.len() == l_pad_) return x;
    TokenSeq<S> y = TokenSeq<S>::zeros(x.dim(), l_pad_);
    y.x.leftCols(x.len()) = x.x;
    y.valid = x.valid;
    y.scale = x.scale;
    return y;
  }

  MatX<S> narrow(const MatX<S>& gx) const {
    return gx.leftCols(cfg_.L);
  }

  static MatX<S> pad_cols(const MatX<S>& m, int cols) {
    if (m.cols() == cols) return m;
    MatX<S> out = MatX<S>::Zero(m.rows(), cols);
    out.leftCols(m.cols()) = m;
    return out;
  }

  static FramePredictions<S> crop(const FramePredictions<S>& p, int len) {
    FramePredictions<S> out;
    out.class_probs = p.class_probs.leftCols(len);
    out.disp = p.disp.leftCols(len);
    out.valid = len;
    out.scale = p.scale;
    return out;
  }

  ModelCfg cfg_;
  int l_pad_ = 0;
  nn::ParamRegistry<S> reg_;
};

}  // namespace tdeed::model
