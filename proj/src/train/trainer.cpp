// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#include "tdeed/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "tdeed/core/rng.hpp"
#include "tdeed/data/sampler.hpp"
#include "tdeed/eval/pyramid.hpp"
#include "tdeed/io/checkpoint.hpp"
#include "tdeed/io/csv.hpp"
#include "tdeed/train/loss.hpp"
#include "tdeed/train/schedule.hpp"

namespace tdeed::train {
namespace {

struct DrawnClip {
  data::ClipSample sample;
  int video = 0;
  int start = 0;
};

DrawnClip draw_clip(const std::vector<data::SyntheticVideo>& vids,
                    const model::ModelCfg& mc, Rng& rng) {
  DrawnClip d;
  d.video = rng.uniform_int(0, static_cast<int>(vids.size()) - 1);
  const auto& v = vids[d.video];
  d.start = rng.uniform_int(0, v.ann.length - mc.L);
  d.sample = data::sample_clip(v, d.start, mc.L, mc.C, mc.r_E);
  return d;
}

// Per-level supervision for one pyramid clip, optionally blended with a
// mixup partner using the same lambda rule as the flat path.
std::vector<ClipTargets<float>> pyramid_targets(
    const std::vector<data::SyntheticVideo>& vids, const model::ModelCfg& mc,
    const std::vector<model::FramePredictions<float>>& preds,
    const DrawnClip& a, const DrawnClip* b, float lam) {
  std::vector<ClipTargets<float>> out;
  int stride = 1;
  for (const auto& p : preds) {
    ClipTargets<float> t = data::make_scaled_targets<float>(
        vids[a.video].ann, a.start, p.valid, stride, mc.C, mc.r_E);
    if (b) {
      ClipTargets<float> u = data::make_scaled_targets<float>(
          vids[b->video].ann, b->start, p.valid, stride, mc.C, mc.r_E);
      t.class_targets = lam * t.class_targets + (1.0f - lam) * u.class_targets;
      if (lam < 0.5f) t.disp = u.disp;
    }
    out.push_back(std::move(t));
    stride *= mc.k;
  }
  return out;
}

std::string join_path(const std::string& dir, const std::string& name) {
  return dir + "/" + name;
}

}  // namespace

TrainResult train_model(model::TdeedModel<float>& m,
                        const std::vector<data::SyntheticVideo>& train_videos,
                        const std::vector<data::SyntheticVideo>& val_videos,
                        const TrainCfg& cfg, const eval::EvalCfg& eval_cfg,
                        const std::string& out_dir,
                        const std::string& config_json,
                        const std::string& resume_path) {
  const model::ModelCfg& mc = m.cfg();
  const bool pyramid = mc.temporal_module == model::TemporalModule::sgp_pyramid;
  check_config(!train_videos.empty(), "train: empty training split");
  check_config(cfg.epochs >= 1 && cfg.warmup_epochs >= 0 &&
                   cfg.warmup_epochs < cfg.epochs,
               "train: need 0 <= warmup_epochs < epochs");
  check_config(cfg.class_weight >= 1.0, "train: class weight must be >= 1");
  check_config(cfg.batch_size >= 1 && cfg.clips_per_epoch >= cfg.batch_size,
               "train: clips_per_epoch must cover at least one batch");
  check_config(cfg.mixup_prob >= 0.0 && cfg.mixup_prob <= 1.0,
               "train: mixup_prob must lie in [0,1]");
  check_config(!(pyramid && cfg.label_dilation >= 0),
               "train: label dilation applies to frame-rate heads only");
  if (cfg.stop_at_train_map > 0.0)
    check_config(cfg.map_check_every >= 1,
                 "train: map_check_every must be >= 1 when a target is set");
  for (const auto& v : train_videos)
    check_config(v.ann.length >= mc.L, "train: video shorter than clip length");

  std::filesystem::create_directories(out_dir);
  AdamW<float> opt(m.params(), cfg.adamw);
  nn::GradVec<float> g = m.params().make_grads();
  const int steps = cfg.clips_per_epoch / cfg.batch_size;
  const float w = static_cast<float>(cfg.class_weight);

  TrainResult res;
  std::vector<std::vector<std::string>> csv_rows;
  int start_epoch = 0;
  double best_val = -1.0;
  int since_best = 0;

  if (!resume_path.empty()) {
    io::CheckpointMeta meta = io::load_checkpoint(resume_path, m.params(), &opt);
    start_epoch = meta.next_epoch;
    best_val = meta.best_val;
    since_best = meta.epochs_since_best;
    const std::string prev_csv = join_path(out_dir, "metrics.csv");
    if (std::filesystem::exists(prev_csv)) {
      // Keep the already-written rows verbatim so the final file is
      // byte-identical to an uninterrupted run.
      const io::CsvTable t = io::read_csv(prev_csv);
      for (const auto& row : t.rows) {
        if (row.empty() || std::stoi(row[0]) >= start_epoch) continue;
        csv_rows.push_back(row);
        res.log.push_back({std::stoi(row[0]), std::stod(row[1]),
                           std::stod(row[2]), std::stod(row[3]),
                           std::stod(row[4])});
      }
    }
  }

  const auto write_csv = [&] {
    io::CsvWriter csv(join_path(out_dir, "metrics.csv"),
                      {"epoch", "lr", "loss_c", "loss_d", "val_map_d1"});
    for (const auto& row : csv_rows) csv.write_row(row);
  };
  const auto save = [&](const std::string& name, int next_epoch) {
    io::CheckpointMeta meta;
    meta.config_json = config_json;
    meta.next_epoch = next_epoch;
    meta.best_val = best_val;
    meta.epochs_since_best = since_best;
    io::save_checkpoint(join_path(out_dir, name), m.params(), &opt, meta);
  };
  const auto validation_map = [&]() {
    if (pyramid)
      return eval::pyramid_layer_map(m, val_videos,
                                     {1, eval_cfg.threshold, eval_cfg.window,
                                      eval_cfg.final_threshold})
          .back()
          .cumulative_map;
    return eval::evaluate_videos(m, val_videos, eval_cfg).map_d1;
  };

  res.stop_reason = "completed";
  for (int epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at(epoch, cfg.epochs, cfg.warmup_epochs, cfg.base_lr);
    Rng rng_sample = Rng::derive(cfg.seed, 1, static_cast<std::uint64_t>(epoch));
    Rng rng_aug = Rng::derive(cfg.seed, 2, static_cast<std::uint64_t>(epoch));
    double sum_c = 0.0, sum_d = 0.0;
    long clips_seen = 0;

    for (int step = 0; step < steps; ++step) {
      nn::ParamRegistry<float>::zero(g);
      for (int bi = 0; bi < cfg.batch_size; ++bi) {
        DrawnClip dc = draw_clip(train_videos, mc, rng_sample);
        data::ClipSample s = data::augment(dc.sample, cfg.augment, rng_aug);

        bool mixed = false;
        DrawnClip partner;
        float lam = 1.0f;
        if (cfg.mixup_prob > 0.0 && rng_aug.bernoulli(cfg.mixup_prob)) {
          mixed = true;
          partner = draw_clip(train_videos, mc, rng_sample);
          const data::ClipSample ps =
              data::augment(partner.sample, cfg.augment, rng_aug);
          lam = static_cast<float>(rng_aug.beta(cfg.mixup_alpha, cfg.mixup_beta));
          s = data::mixup_with(s, ps, lam);
        }

        LossValue<float> loss;
        model::TdeedModel<float>::Cache cache;
        if (pyramid) {
          const auto preds = m.pyramid_forward(s.frames, cache);
          const auto targets = pyramid_targets(train_videos, mc, preds, dc,
                                               mixed ? &partner : nullptr, lam);
          const float scale = 1.0f / static_cast<float>(preds.size());
          std::vector<std::pair<MatX<float>, MatX<float>>> grads;
          for (std::size_t j = 0; j < preds.size(); ++j) {
            const LossValue<float> lj = combined_loss(preds[j], targets[j], w);
            loss.classification += lj.classification * scale;
            loss.displacement += lj.displacement * scale;
            auto [gp, gd] = combined_loss_backward(preds[j], targets[j], w);
            grads.emplace_back(gp * scale, gd * scale);
          }
          loss.total = loss.classification + loss.displacement;
          if (!std::isfinite(loss.total))
            throw TrainingDiverged("training diverged: non-finite loss at epoch " +
                                   std::to_string(epoch) + " step " +
                                   std::to_string(step));
          m.pyramid_backward(cache, grads, g);
        } else {
          if (cfg.label_dilation >= 0)
            s.targets = dilate_labels(s.targets, cfg.label_dilation);
          const auto preds = m.forward(s.frames, cache);
          loss = combined_loss(preds, s.targets, w);
          if (!std::isfinite(loss.total))
            throw TrainingDiverged("training diverged: non-finite loss at epoch " +
                                   std::to_string(epoch) + " step " +
                                   std::to_string(step));
          auto [gp, gd] = combined_loss_backward(preds, s.targets, w);
          if (cfg.label_dilation >= 0) {
            gd.setZero();  // classification-only mode carries no regression
            loss.displacement = 0;
            loss.total = loss.classification;
          }
          m.backward(cache, gp, gd, g);
        }
        sum_c += loss.classification;
        sum_d += loss.displacement;
        ++clips_seen;
      }
      const float inv_b = 1.0f / static_cast<float>(cfg.batch_size);
      for (auto& gi : g) gi *= inv_b;
      opt.step(m.params(), g, lr);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.loss_c = sum_c / static_cast<double>(clips_seen);
    rec.loss_d = sum_d / static_cast<double>(clips_seen);
    rec.val_map_d1 = -1.0;

    bool stop = false;
    if (!val_videos.empty()) {
      rec.val_map_d1 = validation_map();
      if (rec.val_map_d1 > best_val) {
        best_val = rec.val_map_d1;
        since_best = 0;
        save("checkpoint_best.tdcp", epoch + 1);
      } else if (++since_best >= cfg.patience) {
        stop = true;
        res.stop_reason = "patience";
      }
    }

    res.log.push_back(rec);
    csv_rows.push_back({std::to_string(rec.epoch), io::fmt_num(rec.lr),
                        io::fmt_num(rec.loss_c), io::fmt_num(rec.loss_d),
                        io::fmt_num(rec.val_map_d1)});
    write_csv();
    save("checkpoint.tdcp", epoch + 1);
    res.epochs_run = epoch + 1;

    if (!stop && cfg.stop_at_train_map > 0.0 && !pyramid &&
        (epoch + 1) % cfg.map_check_every == 0) {
      const double train_map =
          eval::evaluate_videos(m, train_videos, eval_cfg).map_d1;
      if (train_map >= cfg.stop_at_train_map) {
        stop = true;
        res.stop_reason = "target_reached";
      }
    }
    if (stop) break;
  }

  if (val_videos.empty())
    save("checkpoint_best.tdcp", res.epochs_run);
  res.best_val = best_val;
  return res;
}

}  // namespace tdeed::train
