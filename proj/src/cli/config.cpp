// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#include "cli/config.hpp"

#include <fstream>

#include "tdeed/core/errors.hpp"

namespace tdeed::cli {

using nlohmann::json;

json default_config() {
  return json{
      {"seed", 1},
      {"out_dir", "out"},
      {"dataset",
       {{"dir", ""},
        {"num_videos", 10},
        {"video_length", 400},
        {"classes", 4},
        {"sparsity", 0.02},
        {"height", 64},
        {"width", 64},
        {"fps", 25.0},
        {"val_fraction", 0.2},
        {"test_fraction", 0.2}}},
      {"model",
       {{"backbone", "tiny_desk"},
        {"d", 128},
        {"shift_module", "gsf"},
        {"shift_placement", "latter_half"},
        {"shift_fraction", 0.25},
        {"clip_length", 100},
        {"blocks", 2},
        {"scale_factor", 2},
        {"sgp_ks", 7},
        {"sgp_r", 4},
        {"sgp_groups", 0},
        {"sgp_ffn", 4},
        {"skip_variant", "sgp_mixer"},
        {"radius", 2},
        {"temporal_module", "sgp_ed"},
        {"attn_heads", 4},
        {"baseline_layers", 0},
        {"transformer_ffn", 0},
        {"gru_hidden", 0}}},
      {"train",
       {{"epochs", 50},
        {"clips_per_epoch", 5000},
        {"batch_size", 8},
        {"base_lr", 8e-4},
        {"warmup_epochs", 3},
        {"class_weight", 5.0},
        {"weight_decay", 1e-2},
        {"grad_clip", 0.0},
        {"augment", true},
        {"mixup_prob", 0.0},
        {"mixup_alpha", 0.2},
        {"mixup_beta", 0.2},
        {"label_dilation", -1},
        {"patience", 10},
        {"stop_at_train_map", 0.0},
        {"map_check_every", 5},
        {"resume", ""}}},
      {"eval",
       {{"split", "test"},
        {"checkpoint", ""},
        {"predictions", ""},
        {"overlap", 0.5},
        {"threshold", 0.01},
        {"suppress", "snms"},
        {"window", 3},
        {"snms_mode", "linear"},
        {"sigma", 1.0},
        {"final_threshold", 0.05},
        {"use_displacement", true}}},
      {"ablate", {{"study", "skip_variant"}, {"seeds", 2}}},
      {"analyze",
       {{"kind", "discriminability"},
        {"checkpoint", ""},
        {"split", "val"},
        {"num_probes", 8},
        {"delta", 1}}}};
}

namespace {

std::string joined(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

// "dataset.sparsity" accepts either a number or a named preset.
bool kind_ok(const std::string& path, const json& dflt, const json& v) {
  if (path == "dataset.sparsity") return v.is_number() || v.is_string();
  if (dflt.is_number()) return v.is_number();
  if (dflt.is_string()) return v.is_string();
  if (dflt.is_boolean()) return v.is_boolean();
  return dflt.type() == v.type();
}

void merge_into(json& base, const json& user, const std::string& prefix) {
  check_config(user.is_object(), "config: '" + (prefix.empty() ? "<top>" : prefix) +
                                     "' must be an object");
  for (const auto& [key, value] : user.items()) {
    const std::string path = joined(prefix, key);
    auto it = base.find(key);
    check_config(it != base.end(), "config: unknown key '" + path + "'");
    if (it->is_object()) {
      merge_into(*it, value, path);
    } else {
      check_config(kind_ok(path, *it, value),
                   "config: '" + path + "' has the wrong type");
      *it = value;
    }
  }
}

double resolve_sparsity(const json& v) {
  if (v.is_number()) return v.get<double>();
  const std::string s = v.get<std::string>();
  if (s == "fs-like") return 0.0023;
  if (s == "fd-like") return 0.022;
  throw ConfigError("dataset.sparsity: unknown preset '" + s +
                    "' (use 'fs-like', 'fd-like' or a number)");
}

model::BackboneVariant parse_backbone(const std::string& s) {
  if (s == "tiny_desk") return model::BackboneVariant::tiny_desk;
  if (s == "mf200_like") return model::BackboneVariant::mf200_like;
  if (s == "mf800_like") return model::BackboneVariant::mf800_like;
  throw ConfigError("model.backbone: unknown variant '" + s + "'");
}

model::ShiftModuleKind parse_shift(const std::string& s) {
  if (s == "none") return model::ShiftModuleKind::none;
  if (s == "gsm") return model::ShiftModuleKind::gsm;
  if (s == "gsf") return model::ShiftModuleKind::gsf;
  throw ConfigError("model.shift_module: expected none|gsm|gsf, got '" + s + "'");
}

model::ShiftPlacement parse_placement(const std::string& s) {
  if (s == "all") return model::ShiftPlacement::all;
  if (s == "latter_half") return model::ShiftPlacement::latter_half;
  throw ConfigError("model.shift_placement: expected all|latter_half, got '" + s +
                    "'");
}

model::SkipVariant parse_skip(const std::string& s) {
  if (s == "none") return model::SkipVariant::none;
  if (s == "sum") return model::SkipVariant::sum;
  if (s == "concat") return model::SkipVariant::concat;
  if (s == "sgp_mixer_sum") return model::SkipVariant::sgp_mixer_sum;
  if (s == "sgp_mixer") return model::SkipVariant::sgp_mixer;
  throw ConfigError("model.skip_variant: unknown variant '" + s + "'");
}

model::TemporalModule parse_temporal(const std::string& s) {
  if (s == "sgp_ed") return model::TemporalModule::sgp_ed;
  if (s == "transformer") return model::TemporalModule::transformer;
  if (s == "gru") return model::TemporalModule::gru;
  if (s == "sgp_pyramid") return model::TemporalModule::sgp_pyramid;
  throw ConfigError("model.temporal_module: unknown module '" + s + "'");
}

void check_split_name(const std::string& key, const std::string& s) {
  check_config(s == "train" || s == "val" || s == "test",
               key + ": expected train|val|test, got '" + s + "'");
}

}  // namespace

void apply_override(json& cfg, const std::string& spec) {
  const auto eq = spec.find('=');
  check_config(eq != std::string::npos && eq > 0,
               "--set expects dotted.path=value, got '" + spec + "'");
  const std::string path = spec.substr(0, eq);
  const std::string raw = spec.substr(eq + 1);

  json* node = &cfg;
  std::size_t pos = 0;
  while (true) {
    const auto dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot - pos);
    auto it = node->find(key);
    check_config(it != node->end(), "config: unknown key '" + path + "'");
    node = &*it;
    if (dot == std::string::npos) break;
    check_config(node->is_object(), "config: '" + path.substr(0, dot) +
                                        "' is a leaf, cannot descend");
    pos = dot + 1;
  }
  check_config(!node->is_object(),
               "config: '" + path + "' is a section, not a leaf");

  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;  // unquoted strings are the common case on a command line
  }
  check_config(kind_ok(path, *node, value),
               "config: '" + path + "' has the wrong type");
  *node = value;
}

namespace {

RunConfig parse_validated(const json& merged);

}  // namespace

RunConfig parse_run_config(const json& j) {
  json merged = default_config();
  merge_into(merged, j, "");
  try {
    return parse_validated(merged);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

namespace {

RunConfig parse_validated(const json& merged) {
  RunConfig rc;
  rc.resolved = merged;
  rc.seed = merged.at("seed").get<std::uint64_t>();
  rc.out_dir = merged.at("out_dir").get<std::string>();
  check_config(!rc.out_dir.empty(), "out_dir: must not be empty");

  const json& d = merged.at("dataset");
  rc.dataset.dir = d.at("dir").get<std::string>();
  rc.dataset.num_videos = d.at("num_videos").get<int>();
  rc.dataset.video_length = d.at("video_length").get<int>();
  rc.dataset.classes = d.at("classes").get<int>();
  rc.dataset.sparsity = resolve_sparsity(d.at("sparsity"));
  rc.dataset.height = d.at("height").get<int>();
  rc.dataset.width = d.at("width").get<int>();
  rc.dataset.fps = d.at("fps").get<double>();
  rc.dataset.val_fraction = d.at("val_fraction").get<double>();
  rc.dataset.test_fraction = d.at("test_fraction").get<double>();
  check_config(rc.dataset.val_fraction >= 0 && rc.dataset.test_fraction >= 0 &&
                   rc.dataset.val_fraction + rc.dataset.test_fraction < 1.0,
               "dataset: val_fraction + test_fraction must lie in [0,1)");

  const json& m = merged.at("model");
  rc.model.backbone = m.at("backbone").get<std::string>();
  rc.model.d = m.at("d").get<int>();
  rc.model.shift_module = m.at("shift_module").get<std::string>();
  rc.model.shift_placement = m.at("shift_placement").get<std::string>();
  rc.model.shift_fraction = m.at("shift_fraction").get<double>();
  rc.model.clip_length = m.at("clip_length").get<int>();
  rc.model.blocks = m.at("blocks").get<int>();
  rc.model.scale_factor = m.at("scale_factor").get<int>();
  rc.model.sgp_ks = m.at("sgp_ks").get<int>();
  rc.model.sgp_r = m.at("sgp_r").get<int>();
  rc.model.sgp_groups = m.at("sgp_groups").get<int>();
  rc.model.sgp_ffn = m.at("sgp_ffn").get<int>();
  rc.model.skip_variant = m.at("skip_variant").get<std::string>();
  rc.model.radius = m.at("radius").get<int>();
  rc.model.temporal_module = m.at("temporal_module").get<std::string>();
  rc.model.attn_heads = m.at("attn_heads").get<int>();
  rc.model.baseline_layers = m.at("baseline_layers").get<int>();
  rc.model.transformer_ffn = m.at("transformer_ffn").get<int>();
  rc.model.gru_hidden = m.at("gru_hidden").get<int>();

  const json& t = merged.at("train");
  rc.train.epochs = t.at("epochs").get<int>();
  rc.train.clips_per_epoch = t.at("clips_per_epoch").get<int>();
  rc.train.batch_size = t.at("batch_size").get<int>();
  rc.train.base_lr = t.at("base_lr").get<double>();
  rc.train.warmup_epochs = t.at("warmup_epochs").get<int>();
  rc.train.class_weight = t.at("class_weight").get<double>();
  rc.train.weight_decay = t.at("weight_decay").get<double>();
  rc.train.grad_clip = t.at("grad_clip").get<double>();
  rc.train.augment = t.at("augment").get<bool>();
  rc.train.mixup_prob = t.at("mixup_prob").get<double>();
  rc.train.mixup_alpha = t.at("mixup_alpha").get<double>();
  rc.train.mixup_beta = t.at("mixup_beta").get<double>();
  rc.train.label_dilation = t.at("label_dilation").get<int>();
  rc.train.patience = t.at("patience").get<int>();
  rc.train.stop_at_train_map = t.at("stop_at_train_map").get<double>();
  rc.train.map_check_every = t.at("map_check_every").get<int>();
  rc.train.resume = t.at("resume").get<std::string>();

  const json& e = merged.at("eval");
  rc.eval.split = e.at("split").get<std::string>();
  check_split_name("eval.split", rc.eval.split);
  rc.eval.checkpoint = e.at("checkpoint").get<std::string>();
  rc.eval.predictions = e.at("predictions").get<std::string>();
  rc.eval.overlap = e.at("overlap").get<double>();
  rc.eval.threshold = e.at("threshold").get<double>();
  rc.eval.suppress = e.at("suppress").get<std::string>();
  check_config(rc.eval.suppress == "nms" || rc.eval.suppress == "snms" ||
                   rc.eval.suppress == "none",
               "eval.suppress: expected nms|snms|none, got '" + rc.eval.suppress +
                   "'");
  rc.eval.window = e.at("window").get<int>();
  rc.eval.snms_mode = e.at("snms_mode").get<std::string>();
  rc.eval.sigma = e.at("sigma").get<double>();
  rc.eval.final_threshold = e.at("final_threshold").get<double>();
  rc.eval.use_displacement = e.at("use_displacement").get<bool>();

  const json& a = merged.at("ablate");
  rc.ablate.study = a.at("study").get<std::string>();
  rc.ablate.seeds = a.at("seeds").get<int>();
  check_config(rc.ablate.seeds >= 1, "ablate.seeds: must be >= 1");

  const json& an = merged.at("analyze");
  rc.analyze.kind = an.at("kind").get<std::string>();
  check_config(rc.analyze.kind == "discriminability" ||
                   rc.analyze.kind == "pyramid_layers",
               "analyze.kind: expected discriminability|pyramid_layers, got '" +
                   rc.analyze.kind + "'");
  rc.analyze.checkpoint = an.at("checkpoint").get<std::string>();
  rc.analyze.split = an.at("split").get<std::string>();
  check_split_name("analyze.split", rc.analyze.split);
  rc.analyze.num_probes = an.at("num_probes").get<int>();
  check_config(rc.analyze.num_probes >= 1, "analyze.num_probes: must be >= 1");
  rc.analyze.delta = an.at("delta").get<int>();

  // Fail fast on bad enum spellings instead of deep inside a command.
  parse_backbone(rc.model.backbone);
  parse_shift(rc.model.shift_module);
  parse_placement(rc.model.shift_placement);
  parse_skip(rc.model.skip_variant);
  parse_temporal(rc.model.temporal_module);
  infer::parse_snms_mode(rc.eval.snms_mode);
  return rc;
}

}  // namespace

RunConfig load_run_config(const std::string& config_path,
                          const std::vector<std::string>& overrides) {
  json j = json::object();
  if (!config_path.empty()) {
    std::ifstream is(config_path);
    check_config(static_cast<bool>(is), "cannot open config file: " + config_path);
    try {
      j = json::parse(is, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::exception& e) {
      throw ConfigError("config file " + config_path + ": " + e.what());
    }
  }
  json merged = default_config();
  merge_into(merged, j, "");
  for (const auto& spec : overrides) apply_override(merged, spec);
  return parse_run_config(merged);
}

data::GeneratorSpec make_generator_spec(const RunConfig& rc) {
  data::GeneratorSpec spec;
  spec.num_videos = rc.dataset.num_videos;
  spec.video_length = rc.dataset.video_length;
  spec.C = rc.dataset.classes;
  spec.sparsity = rc.dataset.sparsity;
  spec.height = rc.dataset.height;
  spec.width = rc.dataset.width;
  spec.clip_length = rc.model.clip_length;
  spec.fps = rc.dataset.fps;
  spec.seed = rc.seed;
  return spec;
}

model::ModelCfg make_model_cfg(const RunConfig& rc) {
  model::ModelCfg cfg;
  cfg.backbone.variant = parse_backbone(rc.model.backbone);
  cfg.backbone.d = rc.model.d;
  cfg.backbone.shift = parse_shift(rc.model.shift_module);
  cfg.backbone.placement = parse_placement(rc.model.shift_placement);
  cfg.backbone.shift_fraction = rc.model.shift_fraction;
  cfg.L = rc.model.clip_length;
  cfg.B = rc.model.blocks;
  cfg.k = rc.model.scale_factor;
  cfg.sgp.d = rc.model.d;
  cfg.sgp.ks = rc.model.sgp_ks;
  cfg.sgp.r = rc.model.sgp_r;
  cfg.sgp.groups = rc.model.sgp_groups;
  cfg.sgp.ffn_expansion = rc.model.sgp_ffn;
  cfg.skip = parse_skip(rc.model.skip_variant);
  cfg.C = rc.dataset.classes;
  cfg.r_E = rc.model.radius;
  cfg.temporal_module = parse_temporal(rc.model.temporal_module);
  cfg.heads = rc.model.attn_heads;
  cfg.baseline_layers = rc.model.baseline_layers;
  cfg.transformer_ffn = rc.model.transformer_ffn;
  cfg.gru_hidden = rc.model.gru_hidden;
  return cfg;
}

train::TrainCfg make_train_cfg(const RunConfig& rc) {
  train::TrainCfg cfg;
  cfg.epochs = rc.train.epochs;
  cfg.clips_per_epoch = rc.train.clips_per_epoch;
  cfg.batch_size = rc.train.batch_size;
  cfg.base_lr = rc.train.base_lr;
  cfg.warmup_epochs = rc.train.warmup_epochs;
  cfg.class_weight = rc.train.class_weight;
  cfg.adamw.weight_decay = rc.train.weight_decay;
  cfg.adamw.grad_clip = rc.train.grad_clip;
  cfg.augment = rc.train.augment ? data::AugmentCfg::training_defaults()
                                 : data::AugmentCfg::all_off();
  cfg.mixup_prob = rc.train.mixup_prob;
  cfg.mixup_alpha = rc.train.mixup_alpha;
  cfg.mixup_beta = rc.train.mixup_beta;
  cfg.label_dilation = rc.train.label_dilation;
  cfg.patience = rc.train.patience;
  cfg.stop_at_train_map = rc.train.stop_at_train_map;
  cfg.map_check_every = rc.train.map_check_every;
  cfg.seed = rc.seed;
  return cfg;
}

eval::EvalCfg make_eval_cfg(const RunConfig& rc) {
  eval::EvalCfg cfg;
  cfg.overlap = rc.eval.overlap;
  cfg.threshold = rc.eval.threshold;
  cfg.suppress = rc.eval.suppress;
  cfg.window = rc.eval.window;
  cfg.snms_mode = infer::parse_snms_mode(rc.eval.snms_mode);
  cfg.sigma = rc.eval.sigma;
  cfg.final_threshold = rc.eval.final_threshold;
  // Dilated training has no displacement signal to decode.
  cfg.use_displacement =
      rc.train.label_dilation >= 0 ? false : rc.eval.use_displacement;
  return cfg;
}

std::string dataset_root(const RunConfig& rc) {
  return rc.dataset.dir.empty() ? rc.out_dir + "/dataset" : rc.dataset.dir;
}

}  // namespace tdeed::cli
