// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdeed/data/augment.hpp"
#include "tdeed/data/generator.hpp"
#include "tdeed/eval/evaluate.hpp"
#include "tdeed/model/tdeed.hpp"
#include "tdeed/train/adamw.hpp"

namespace tdeed::train {

struct TrainCfg {
  int epochs = 50;
  int clips_per_epoch = 5000;
  int batch_size = 8;
  double base_lr = 8e-4;
  int warmup_epochs = 3;
  double class_weight = 5.0;  // event-class CE weight
  AdamWCfg adamw;
  data::AugmentCfg augment;
  double mixup_prob = 0.0;  // chance a clip is blended with a fresh partner
  double mixup_alpha = 0.2;
  double mixup_beta = 0.2;
  int label_dilation = -1;  // >=0 switches to dilated classification-only mode
  int patience = 10;        // epochs without val improvement before stopping
  double stop_at_train_map = 0.0;  // >0: stop once train mAP(d1) reaches this
  int map_check_every = 5;         // cadence of the train-mAP check
  std::uint64_t seed = 1;
};

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double loss_c = 0.0;
  double loss_d = 0.0;
  double val_map_d1 = -1.0;  // -1 when no validation ran this epoch
};

struct TrainResult {
  std::vector<EpochRecord> log;
  double best_val = -1.0;
  int epochs_run = 0;
  std::string stop_reason;  // "completed" | "patience" | "target_reached"
};

/// Loss went non-finite; carries the epoch/step where it happened.
struct TrainingDiverged : std::runtime_error {
  explicit TrainingDiverged(const std::string& msg) : std::runtime_error(msg) {}
};

/// Runs the full optimization loop and leaves metrics.csv, checkpoint.tdcp
/// (latest) and checkpoint_best.tdcp (best validation mAP) in out_dir.
/// When resume_path is non-empty, weights/optimizer/epoch counters are
/// restored from it first and the loop continues where it stopped; because
/// every random stream is derived from (seed, epoch, ...), the resumed run
/// replays exactly the epochs the uninterrupted run would have produced.
/// An empty val split disables early stopping. config_json is stored in
/// checkpoints verbatim for provenance.
TrainResult train_model(model::TdeedModel<float>& m,
                        const std::vector<data::SyntheticVideo>& train_videos,
                        const std::vector<data::SyntheticVideo>& val_videos,
                        const TrainCfg& cfg, const eval::EvalCfg& eval_cfg,
                        const std::string& out_dir,
                        const std::string& config_json = "{}",
                        const std::string& resume_path = "");

}  // namespace tdeed::train
