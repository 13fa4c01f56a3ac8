// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "tdeed/core/errors.hpp"
#include "tdeed/core/rng.hpp"
#include "tdeed/core/types.hpp"
#include "tdeed/model/sgp.hpp"
#include "tdeed/nn/dwconv1d.hpp"
#include "tdeed/nn/interp.hpp"
#include "tdeed/nn/linear.hpp"
#include "tdeed/nn/norms.hpp"
#include "tdeed/nn/param.hpp"

namespace tdeed::model {

enum class SkipVariant { none, sum, concat, sgp_mixer_sum, sgp_mixer };

inline const char* to_string(SkipVariant v) {
  switch (v) {
    case SkipVariant::none: return "none";
    case SkipVariant::sum: return "sum";
    case SkipVariant::concat: return "concat";
    case SkipVariant::sgp_mixer_sum: return "sgp_mixer_sum";
    case SkipVariant::sgp_mixer: return "sgp_mixer";
  }
  return "?";
}

/// One decoder stage: upsample the coarse stream, merge it with the skip
/// stream under the configured variant, then run a full SGP layer on the
/// merged sequence.
///
/// Merge structure per variant:
///   none          up(z)
///   sum           up(z) + skip
///   concat        proj2([up(z); skip])
///   sgp_mixer_sum sum of the six mixer streams
///   sgp_mixer     proj6 of the six mixer streams stacked
/// where the six mixer streams are: gated instant transforms of both
/// (normalized) inputs, two cross-gated window convolutions, and both
/// normalized inputs as shortcuts.
template <class S>
class DecoderBlock {
 public:
  struct Cache {
    // Plain variants.
    nn::UpsampleCache<S> c_up;
    typename nn::Linear<S>::Cache c_proj2;
    // Mixer variants.
    typename nn::LayerNorm<S>::Cache c_ln_z, c_ln_s;
    typename nn::Linear<S>::Cache c_fc_iz, c_fc_gz, c_fc_is, c_fc_gs;
    typename nn::DwConv1d<S>::Cache c_conv_gs, c_conv_bz, c_conv_wz, c_conv_gz,
        c_conv_bs, c_conv_ws;
    typename nn::Linear<S>::Cache c_proj6;
    MatX<S> zu, sn;
    MatX<S> p_z, p_s;          // instant pointwise transforms
    MatX<S> gate_z, gate_s;    // d x 1 mean-token gates
    MatX<S> wgate_s, wsum_z;   // window branch on zu, gated by sn
    MatX<S> wgate_z, wsum_s;   // window branch on sn, gated by zu
    // Shared tail.
    typename SgpLayer<S>::Cache c_sgp;
    int valid = 0;
    int z_cols = 0;
  };

  DecoderBlock() = default;
  DecoderBlock(const SgpCfg& cfg, SkipVariant kind, int k)
      : sgp(cfg), kind_(kind), k_(k) {
    const int d = cfg.d;
    if (kind == SkipVariant::concat) proj2 = nn::Linear<S>(2 * d, d);
    if (is_mixer()) {
      ln_z = nn::LayerNorm<S>(d);
      ln_s = nn::LayerNorm<S>(d);
      fc_iz = nn::Linear<S>(d, d);
      fc_gz = nn::Linear<S>(d, d);
      fc_is = nn::Linear<S>(d, d);
      fc_gs = nn::Linear<S>(d, d);
      conv_gs = nn::DwConv1d<S>(d, cfg.ks, 1);
      conv_bz = nn::DwConv1d<S>(d, cfg.ks, 1);
      conv_wz = nn::DwConv1d<S>(d, cfg.ks, cfg.r);
      conv_gz = nn::DwConv1d<S>(d, cfg.ks, 1);
      conv_bs = nn::DwConv1d<S>(d, cfg.ks, 1);
      conv_ws = nn::DwConv1d<S>(d, cfg.ks, cfg.r);
      if (kind == SkipVariant::sgp_mixer) proj6 = nn::Linear<S>(6 * d, d);
    }
  }

  bool is_mixer() const {
    return kind_ == SkipVariant::sgp_mixer || kind_ == SkipVariant::sgp_mixer_sum;
  }

  void init(core::Rng& rng) {
    sgp.init(rng);
    if (kind_ == SkipVariant::concat) proj2.init(rng);
    if (is_mixer()) {
      fc_iz.init(rng);
      fc_gz.init(rng);
      fc_is.init(rng);
      fc_gs.init(rng);
      conv_gs.init(rng);
      conv_bz.init(rng);
      conv_wz.init(rng);
      conv_gz.init(rng);
      conv_bs.init(rng);
      conv_ws.init(rng);
      if (kind_ == SkipVariant::sgp_mixer) proj6.init(rng);
    }
  }

  void register_params(nn::ParamRegistry<S>& reg, const std::string& prefix) {
    if (kind_ == SkipVariant::concat)
      proj2.register_params(reg, nn::scoped(prefix, "proj2"));
    if (is_mixer()) {
      ln_z.register_params(reg, nn::scoped(prefix, "ln_z"));
      ln_s.register_params(reg, nn::scoped(prefix, "ln_s"));
      fc_iz.register_params(reg, nn::scoped(prefix, "fc_iz"));
      fc_gz.register_params(reg, nn::scoped(prefix, "fc_gz"));
      fc_is.register_params(reg, nn::scoped(prefix, "fc_is"));
      fc_gs.register_params(reg, nn::scoped(prefix, "fc_gs"));
      conv_gs.register_params(reg, nn::scoped(prefix, "conv_gs"));
      conv_bz.register_params(reg, nn::scoped(prefix, "conv_bz"));
      conv_wz.register_params(reg, nn::scoped(prefix, "conv_wz"));
      conv_gz.register_params(reg, nn::scoped(prefix, "conv_gz"));
      conv_bs.register_params(reg, nn::scoped(prefix, "conv_bs"));
      conv_ws.register_params(reg, nn::scoped(prefix, "conv_ws"));
      if (kind_ == SkipVariant::sgp_mixer)
        proj6.register_params(reg, nn::scoped(prefix, "proj6"));
    }
    sgp.register_params(reg, nn::scoped(prefix, "sgp"));
  }

  TokenSeq<S> forward(const TokenSeq<S>& z, const TokenSeq<S>& skip, Cache& c) const {
    check_contract(skip.len() == k_ * z.len(),
                   "decoder block: skip length must be k x coarse length");
    const int lx = skip.len();
    const int vx = skip.valid;
    c.valid = vx;
    c.z_cols = z.len();

    TokenSeq<S> merged;
    if (!is_mixer()) {
      TokenSeq<S> up = nn::upsample_linear(z, lx, vx, c.c_up);
      if (kind_ == SkipVariant::none) {
        merged = up;
      } else if (kind_ == SkipVariant::sum) {
        merged = up;
        merged.x += skip.x;
      } else {
        MatX<S> cat(2 * up.dim(), lx);
        cat.topRows(up.dim()) = up.x;
        cat.bottomRows(up.dim()) = skip.x;
        merged = TokenSeq<S>{proj2.forward(cat, c.c_proj2), vx, skip.scale};
        zero_pad_cols(merged.x, vx);
      }
    } else {
      MatX<S> znorm = ln_z.forward(z.x, c.c_ln_z);
      zero_pad_cols(znorm, z.valid);
      TokenSeq<S> zn{znorm, z.valid, z.scale};
      TokenSeq<S> zu = nn::upsample_linear(zn, lx, vx, c.c_up);
      c.zu = zu.x;
      c.sn = ln_s.forward(skip.x, c.c_ln_s);
      zero_pad_cols(c.sn, vx);

      // Instant branches, gated by a transform of each stream's mean token.
      c.p_z = fc_iz.forward(c.zu, c.c_fc_iz);
      c.p_s = fc_is.forward(c.sn, c.c_fc_is);
      MatX<S> mean_z = c.zu.leftCols(vx).rowwise().mean();
      MatX<S> mean_s = c.sn.leftCols(vx).rowwise().mean();
      c.gate_z = nn::sigmoid<S>(fc_gz.forward(mean_z, c.c_fc_gz));
      c.gate_s = nn::sigmoid<S>(fc_gs.forward(mean_s, c.c_fc_gs));
      MatX<S> inst_z = (c.p_z.array().colwise() * c.gate_z.col(0).array()).matrix();
      MatX<S> inst_s = (c.p_s.array().colwise() * c.gate_s.col(0).array()).matrix();

      // Cross-gated window branches.
      c.wgate_s = nn::sigmoid<S>(conv_gs.forward(c.sn, vx, c.c_conv_gs));
      c.wsum_z = conv_bz.forward(c.zu, vx, c.c_conv_bz) +
                 conv_wz.forward(c.zu, vx, c.c_conv_wz);
      c.wgate_z = nn::sigmoid<S>(conv_gz.forward(c.zu, vx, c.c_conv_gz));
      c.wsum_s = conv_bs.forward(c.sn, vx, c.c_conv_bs) +
                 conv_ws.forward(c.sn, vx, c.c_conv_ws);
      MatX<S> win_z = c.wgate_s.cwiseProduct(c.wsum_z);
      MatX<S> win_s = c.wgate_z.cwiseProduct(c.wsum_s);

      const int d = static_cast<int>(skip.x.rows());
      MatX<S> m;
      if (kind_ == SkipVariant::sgp_mixer_sum) {
        m = inst_z + inst_s + win_z + win_s + c.zu + c.sn;
      } else {
        MatX<S> cat(6 * d, lx);
        cat.middleRows(0 * d, d) = inst_z;
        cat.middleRows(1 * d, d) = inst_s;
        cat.middleRows(2 * d, d) = win_z;
        cat.middleRows(3 * d, d) = win_s;
        cat.middleRows(4 * d, d) = c.zu;
        cat.middleRows(5 * d, d) = c.sn;
        m = proj6.forward(cat, c.c_proj6);
      }
      zero_pad_cols(m, vx);
      merged = TokenSeq<S>{std::move(m), vx, skip.scale};
    }
    return sgp.forward(merged, c.c_sgp);
  }

  /// Returns (grad wrt z, grad wrt skip).
  std::pair<MatX<S>, MatX<S>> backward(const Cache& c, const MatX<S>& gy,
                                       nn::GradVec<S>& g) const {
    MatX<S> gm = sgp.backward(c.c_sgp, gy, g);
    const int vx = c.valid;

    if (!is_mixer()) {
      if (kind_ == SkipVariant::none) {
        MatX<S> gz = nn::upsample_linear_backward(c.c_up, gm);
        return {gz, MatX<S>::Zero(gm.rows(), gm.cols())};
      }
      if (kind_ == SkipVariant::sum) {
        MatX<S> gz = nn::upsample_linear_backward(c.c_up, gm);
        return {gz, gm};
      }
      MatX<S> gcat = proj2.backward(c.c_proj2, gm, g);
      const int d = static_cast<int>(gm.rows());
      MatX<S> gtop = gcat.topRows(d);
      MatX<S> gz = nn::upsample_linear_backward(c.c_up, gtop);
      return {gz, gcat.bottomRows(d)};
    }

    const int d = static_cast<int>(gm.rows());
    MatX<S> g_inst_z, g_inst_s, g_win_z, g_win_s, g_zu, g_sn;
    if (kind_ == SkipVariant::sgp_mixer_sum) {
      g_inst_z = gm;
      g_inst_s = gm;
      g_win_z = gm;
      g_win_s = gm;
      g_zu = gm;
      g_sn = gm;
    } else {
      MatX<S> gcat = proj6.backward(c.c_proj6, gm, g);
      g_inst_z = gcat.middleRows(0 * d, d);
      g_inst_s = gcat.middleRows(1 * d, d);
      g_win_z = gcat.middleRows(2 * d, d);
      g_win_s = gcat.middleRows(3 * d, d);
      g_zu = gcat.middleRows(4 * d, d);
      g_sn = gcat.middleRows(5 * d, d);
    }

    // Instant branch for zu.
    {
      MatX<S> gp = (g_inst_z.array().colwise() * c.gate_z.col(0).array()).matrix();
      g_zu += fc_iz.backward(c.c_fc_iz, gp, g);
      MatX<S> ggate = (g_inst_z.leftCols(vx).array() * c.p_z.leftCols(vx).array())
                          .rowwise()
                          .sum()
                          .matrix();
      MatX<S> ga =
          (ggate.array() * c.gate_z.array() * (S(1) - c.gate_z.array())).matrix();
      MatX<S> gmean = fc_gz.backward(c.c_fc_gz, ga, g);
      g_zu.leftCols(vx).colwise() += (gmean.col(0) / S(vx)).eval();
    }
    // Instant branch for sn.
    {
      MatX<S> gp = (g_inst_s.array().colwise() * c.gate_s.col(0).array()).matrix();
      g_sn += fc_is.backward(c.c_fc_is, gp, g);
      MatX<S> ggate = (g_inst_s.leftCols(vx).array() * c.p_s.leftCols(vx).array())
                          .rowwise()
                          .sum()
                          .matrix();
      MatX<S> ga =
          (ggate.array() * c.gate_s.array() * (S(1) - c.gate_s.array())).matrix();
      MatX<S> gmean = fc_gs.backward(c.c_fc_gs, ga, g);
      g_sn.leftCols(vx).colwise() += (gmean.col(0) / S(vx)).eval();
    }

    // Window branch evolving zu, gated by sn.
    {
      MatX<S> gwsum = g_win_z.cwiseProduct(c.wgate_s);
      MatX<S> gwg =
          g_win_z.cwiseProduct(c.wsum_z)
              .cwiseProduct(c.wgate_s)
              .cwiseProduct(MatX<S>::Ones(gm.rows(), gm.cols()) - c.wgate_s);
      g_sn += conv_gs.backward(c.c_conv_gs, gwg, g);
      g_zu += conv_bz.backward(c.c_conv_bz, gwsum, g);
      g_zu += conv_wz.backward(c.c_conv_wz, gwsum, g);
    }
    // Window branch evolving sn, gated by zu.
    {
      MatX<S> gwsum = g_win_s.cwiseProduct(c.wgate_z);
      MatX<S> gwg =
          g_win_s.cwiseProduct(c.wsum_s)
              .cwiseProduct(c.wgate_z)
              .cwiseProduct(MatX<S>::Ones(gm.rows(), gm.cols()) - c.wgate_z);
      g_zu += conv_gz.backward(c.c_conv_gz, gwg, g);
      g_sn += conv_bs.backward(c.c_conv_bs, gwsum, g);
      g_sn += conv_ws.backward(c.c_conv_ws, gwsum, g);
    }

    zero_pad_cols(g_zu, vx);
    zero_pad_cols(g_sn, vx);
    MatX<S> gzn = nn::upsample_linear_backward(c.c_up, g_zu);
    MatX<S> gz = ln_z.backward(c.c_ln_z, gzn, g);
    MatX<S> gskip = ln_s.backward(c.c_ln_s, g_sn, g);
    return {gz, gskip};
  }

  SkipVariant kind() const { return kind_; }

  nn::Linear<S> proj2;
  nn::LayerNorm<S> ln_z, ln_s;
  nn::Linear<S> fc_iz, fc_gz, fc_is, fc_gs;
  nn::DwConv1d<S> conv_gs, conv_bz, conv_wz, conv_gz, conv_bs, conv_ws;
  nn::Linear<S> proj6;
  SgpLayer<S> sgp;

 private:
  SkipVariant kind_ = SkipVariant::sgp_mixer;
  int k_ = 2;
};

}  // namespace tdeed::model
