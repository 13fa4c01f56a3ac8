// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "tdeed/data/augment.hpp"
#include "tdeed/data/generator.hpp"
#include "tdeed/eval/evaluate.hpp"
#include "tdeed/model/tdeed.hpp"
#include "tdeed/train/trainer.hpp"

namespace tdeed::cli {

/// One run's complete configuration, parsed from the merged JSON document.
/// `resolved` keeps that document verbatim; it is what gets hashed into
/// manifests and embedded in checkpoints.
struct RunConfig {
  std::uint64_t seed = 1;
  std::string out_dir = "out";

  struct Dataset {
    std::string dir;  // empty: <out_dir>/dataset
    int num_videos = 10;
    int video_length = 400;
    int classes = 4;
    double sparsity = 0.02;
    int height = 64;
    int width = 64;
    double fps = 25.0;
    double val_fraction = 0.2;
    double test_fraction = 0.2;
  } dataset;

  struct Model {
    std::string backbone = "tiny_desk";
    int d = 128;
    std::string shift_module = "gsf";
    std::string shift_placement = "latter_half";
    double shift_fraction = 0.25;
    int clip_length = 100;
    int blocks = 2;
    int scale_factor = 2;
    int sgp_ks = 7;
    int sgp_r = 4;
    int sgp_groups = 0;
    int sgp_ffn = 4;
    std::string skip_variant = "sgp_mixer";
    int radius = 2;
    std::string temporal_module = "sgp_ed";
    int attn_heads = 4;
    int baseline_layers = 0;
    int transformer_ffn = 0;
    int gru_hidden = 0;
  } model;

  struct Train {
    int epochs = 50;
    int clips_per_epoch = 5000;
    int batch_size = 8;
    double base_lr = 8e-4;
    int warmup_epochs = 3;
    double class_weight = 5.0;
    double weight_decay = 1e-2;
    double grad_clip = 0.0;
    bool augment = true;
    double mixup_prob = 0.0;
    double mixup_alpha = 0.2;
    double mixup_beta = 0.2;
    int label_dilation = -1;
    int patience = 10;
    double stop_at_train_map = 0.0;
    int map_check_every = 5;
    std::string resume;
  } train;

  struct Eval {
    std::string split = "test";
    std::string checkpoint;   // empty: <out_dir>/checkpoint_best.tdcp
    std::string predictions;  // set: score this file instead of a model
    double overlap = 0.5;
    double threshold = 0.01;
    std::string suppress = "snms";
    int window = 3;
    std::string snms_mode = "linear";
    double sigma = 1.0;
    double final_threshold = 0.05;
    bool use_displacement = true;
  } eval;

  struct Ablate {
    std::string study = "skip_variant";
    int seeds = 2;
  } ablate;

  struct Analyze {
    std::string kind = "discriminability";
    std::string checkpoint;
    std::string split = "val";
    int num_probes = 8;
    int delta = 1;
  } analyze;

  nlohmann::json resolved;
};

/// The schema, with every default filled in.
nlohmann::json default_config();

/// Applies one `dotted.path=value` override in place. The path must name an
/// existing leaf. Values parse as JSON scalars, falling back to strings.
void apply_override(nlohmann::json& cfg, const std::string& spec);

/// Validates `j` against the schema (unknown keys rejected with their full
/// path, scalar kinds enforced) and converts it into a RunConfig.
RunConfig parse_run_config(const nlohmann::json& j);

/// defaults <- config file (optional) <- --set overrides, then parse.
RunConfig load_run_config(const std::string& config_path,
                          const std::vector<std::string>& overrides);

data::GeneratorSpec make_generator_spec(const RunConfig& rc);
model::ModelCfg make_model_cfg(const RunConfig& rc);
train::TrainCfg make_train_cfg(const RunConfig& rc);
eval::EvalCfg make_eval_cfg(const RunConfig& rc);

/// Directory holding the train/val/test dataset splits.
std::string dataset_root(const RunConfig& rc);

}  // namespace tdeed::cli
