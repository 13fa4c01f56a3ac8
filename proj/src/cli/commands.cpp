// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#include "cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "tdeed/core/errors.hpp"
#include "tdeed/core/rng.hpp"
#include "tdeed/data/frame_store.hpp"
#include "tdeed/data/generator.hpp"
#include "tdeed/eval/discriminability.hpp"
#include "tdeed/eval/evaluate.hpp"
#include "tdeed/eval/map.hpp"
#include "tdeed/eval/pyramid.hpp"
#include "tdeed/infer/predictions_io.hpp"
#include "tdeed/io/checkpoint.hpp"
#include "tdeed/io/csv.hpp"
#include "tdeed/io/manifest.hpp"
#include "tdeed/io/svg_plot.hpp"
#include "tdeed/train/trainer.hpp"

namespace tdeed::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Splits {
  std::vector<data::SyntheticVideo> train, val, test;
};

void split_counts(int n, double vf, double tf, int& ntr, int& nva, int& nte) {
  nva = static_cast<int>(std::lround(n * vf));
  nte = static_cast<int>(std::lround(n * tf));
  ntr = n - nva - nte;
  check_config(ntr >= 1, "dataset: split fractions leave no training videos");
}

Splits split_videos(std::vector<data::SyntheticVideo> videos, const RunConfig& rc) {
  int ntr = 0, nva = 0, nte = 0;
  split_counts(static_cast<int>(videos.size()), rc.dataset.val_fraction,
               rc.dataset.test_fraction, ntr, nva, nte);
  Splits s;
  for (int i = 0; i < static_cast<int>(videos.size()); ++i) {
    auto& dst = i < ntr ? s.train : (i < ntr + nva ? s.val : s.test);
    dst.push_back(std::move(videos[i]));
  }
  return s;
}

void save_split(const std::string& root, const std::string& name,
                const std::vector<data::SyntheticVideo>& videos,
                std::vector<std::string>& artifacts) {
  const std::string dir = root + "/" + name;
  fs::create_directories(dir);
  data::save_dataset(dir, videos);
  artifacts.push_back(name + "/annotations.json");
  for (const auto& v : videos) artifacts.push_back(name + "/" + v.ann.video_id + ".pes");
}

void generate_to_disk(const RunConfig& rc) {
  const auto spec = make_generator_spec(rc);
  auto videos = data::generate_dataset(spec);
  Splits s = split_videos(std::move(videos), rc);
  const std::string root = dataset_root(rc);
  std::vector<std::string> artifacts;
  save_split(root, "train", s.train, artifacts);
  save_split(root, "val", s.val, artifacts);
  save_split(root, "test", s.test, artifacts);
  io::write_manifest(root, rc.resolved.dump(2), rc.seed, artifacts);
  std::cout << "[gen] " << root << ": " << s.train.size() << " train / "
            << s.val.size() << " val / " << s.test.size() << " test videos\n";
}

// Generates the dataset on first use so every command works from a bare
// config; an existing dataset is reused as-is.
void ensure_dataset(const RunConfig& rc) {
  if (!fs::exists(dataset_root(rc) + "/train/annotations.json")) generate_to_disk(rc);
}

std::vector<data::SyntheticVideo> load_split(const RunConfig& rc,
                                             const std::string& name) {
  return data::load_dataset(dataset_root(rc) + "/" + name);
}

std::unique_ptr<model::TdeedModel<float>> fresh_model(const RunConfig& rc) {
  auto m = std::make_unique<model::TdeedModel<float>>(make_model_cfg(rc));
  core::Rng rng = core::Rng::derive(rc.seed, 0);
  m->init(rng);
  return m;
}

struct LoadedModel {
  std::unique_ptr<model::TdeedModel<float>> m;
  RunConfig rc;  // the configuration the checkpoint was trained with
};

LoadedModel model_from_checkpoint(const std::string& path) {
  const io::CheckpointMeta meta = io::read_checkpoint_meta(path);
  LoadedModel lm;
  lm.rc = parse_run_config(json::parse(meta.config_json));
  lm.m = std::make_unique<model::TdeedModel<float>>(make_model_cfg(lm.rc));
  io::load_checkpoint<float>(path, lm.m->params(), nullptr);
  return lm;
}

// mAP at both reported tolerances; pyramid models score their final
// cumulative union since they have no single stitched output.
std::pair<double, double> model_map_pair(
    const model::TdeedModel<float>& m,
    const std::vector<data::SyntheticVideo>& videos, const eval::EvalCfg& ec) {
  if (m.cfg().temporal_module == model::TemporalModule::sgp_pyramid) {
    eval::PyramidEvalCfg pc{1, ec.threshold, ec.window, ec.final_threshold};
    const double d1 = eval::pyramid_layer_map(m, videos, pc).back().cumulative_map;
    pc.delta = 2;
    const double d2 = eval::pyramid_layer_map(m, videos, pc).back().cumulative_map;
    return {d1, d2};
  }
  const auto out = eval::evaluate_videos(m, videos, ec);
  return {out.map_d1, out.map_d2};
}

std::vector<double> csv_column(const io::CsvTable& t, const std::string& name) {
  std::size_t col = t.header.size();
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (t.header[i] == name) col = i;
  check_contract(col < t.header.size(), "csv column missing: " + name);
  std::vector<double> out;
  for (const auto& row : t.rows) out.push_back(std::stod(row.at(col)));
  return out;
}

// Plots are always rebuilt from the CSV on disk, never from live values, so
// regenerating one is a pure function of the file.
void plot_training_curves(const std::string& out_dir) {
  const io::CsvTable t = io::read_csv(out_dir + "/metrics.csv");
  const auto epoch = csv_column(t, "epoch");
  io::Series lc{"loss_cls", epoch, csv_column(t, "loss_c")};
  io::Series ld{"loss_disp", epoch, csv_column(t, "loss_d")};
  io::Series val{"val_map_d1", {}, {}};
  const auto vm = csv_column(t, "val_map_d1");
  for (std::size_t i = 0; i < vm.size(); ++i) {
    if (vm[i] >= 0.0) {
      val.x.push_back(epoch[i]);
      val.y.push_back(vm[i]);
    }
  }
  std::vector<io::Series> series{lc, ld};
  if (!val.x.empty()) series.push_back(val);
  io::write_line_chart(out_dir + "/train_curves.svg", "training curves", "epoch",
                       "value", series);
}

void run_training(const RunConfig& rc, const Splits& splits,
                  const std::string& out_dir) {
  fs::create_directories(out_dir);
  auto m = fresh_model(rc);
  const auto result =
      train::train_model(*m, splits.train, splits.val, make_train_cfg(rc),
                         make_eval_cfg(rc), out_dir, rc.resolved.dump(2),
                         rc.train.resume);
  plot_training_curves(out_dir);
  std::vector<std::string> artifacts{"metrics.csv", "checkpoint.tdcp",
                                     "checkpoint_best.tdcp", "train_curves.svg"};
  io::write_manifest(out_dir, rc.resolved.dump(2), rc.seed, artifacts);
  std::cout << "[train] " << out_dir << ": " << result.epochs_run << " epochs ("
            << result.stop_reason << "), best val mAP "
            << io::fmt_num(result.best_val) << "\n";
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Identity of a training run: everything that influences the weights. The
// eval section, output paths and resume plumbing stay out so retraining can
// be skipped when only those change.
std::string train_cache_key(const RunConfig& rc) {
  json id;
  id["dataset"] = rc.resolved.at("dataset");
  id["dataset"].erase("dir");
  id["model"] = rc.resolved.at("model");
  id["train"] = rc.resolved.at("train");
  id["train"].erase("resume");
  id["seed"] = rc.seed;
  return hex64(io::fnv1a64(id.dump()));
}

struct Cell {
  std::string name;
  std::vector<std::string> sets;
};

std::vector<Cell> study_cells(const std::string& study) {
  if (study == "temporal_module")
    return {{"sgp_ed", {"model.temporal_module=sgp_ed"}},
            {"transformer", {"model.temporal_module=transformer"}},
            {"gru", {"model.temporal_module=gru"}}};
  if (study == "skip_variant")
    return {{"none", {"model.temporal_module=sgp_ed", "model.skip_variant=none"}},
            {"sum", {"model.temporal_module=sgp_ed", "model.skip_variant=sum"}},
            {"concat", {"model.temporal_module=sgp_ed", "model.skip_variant=concat"}},
            {"sgp_mixer_sum",
             {"model.temporal_module=sgp_ed", "model.skip_variant=sgp_mixer_sum"}},
            {"sgp_mixer",
             {"model.temporal_module=sgp_ed", "model.skip_variant=sgp_mixer"}}};
  if (study == "head_mode")
    return {{"wo_dil0", {"model.radius=0", "train.label_dilation=0"}},
            {"wo_dil1", {"model.radius=0", "train.label_dilation=1"}},
            {"re1", {"model.radius=1", "train.label_dilation=-1"}},
            {"re2", {"model.radius=2", "train.label_dilation=-1"}}};
  if (study == "pyramid")
    return {{"encoder_decoder", {"model.temporal_module=sgp_ed"}},
            {"sgp_pyramid", {"model.temporal_module=sgp_pyramid"}}};
  if (study == "shift_module")
    return {{"gsm", {"model.shift_module=gsm", "model.shift_placement=all"}},
            {"gsm_half",
             {"model.shift_module=gsm", "model.shift_placement=latter_half"}},
            {"gsf", {"model.shift_module=gsf", "model.shift_placement=all"}},
            {"gsf_half",
             {"model.shift_module=gsf", "model.shift_placement=latter_half"}}};
  if (study == "clip_length")
    return {{"L25", {"model.clip_length=25"}},
            {"L50", {"model.clip_length=50"}},
            {"L100", {"model.clip_length=100"}},
            {"L200", {"model.clip_length=200"}}};
  if (study == "postproc")
    return {{"nms", {"eval.suppress=nms"}}, {"snms", {"eval.suppress=snms"}}};
  throw ConfigError("ablate.study: unknown study '" + study + "'");
}

RunConfig cell_config(const RunConfig& base, const Cell& cell, std::uint64_t seed) {
  json j = base.resolved;
  for (const auto& s : cell.sets) apply_override(j, s);
  j["seed"] = seed;
  return parse_run_config(j);
}

// Trains (or reuses) the cell's model under out_dir/cache and returns the
// cache directory holding checkpoint_best.tdcp.
std::string train_cached(const RunConfig& cell_rc, const Splits& splits,
                         const std::string& base_out) {
  const std::string dir = base_out + "/cache/" + train_cache_key(cell_rc);
  if (fs::exists(dir + "/checkpoint_best.tdcp")) {
    std::cout << "[ablate] reusing " << dir << "\n";
    return dir;
  }
  RunConfig rc = cell_rc;
  rc.train.resume.clear();
  run_training(rc, splits, dir);
  return dir;
}

}  // namespace

void cmd_gen(const RunConfig& rc) {
  fs::create_directories(rc.out_dir);
  generate_to_disk(rc);
}

void cmd_train(const RunConfig& rc) {
  fs::create_directories(rc.out_dir);
  ensure_dataset(rc);
  Splits splits;
  splits.train = load_split(rc, "train");
  splits.val = load_split(rc, "val");
  run_training(rc, splits, rc.out_dir);
}

void cmd_eval(const RunConfig& rc) {
  fs::create_directories(rc.out_dir);
  ensure_dataset(rc);
  const auto videos = load_split(rc, rc.eval.split);
  check_config(!videos.empty(), "eval: split '" + rc.eval.split + "' is empty");
  std::vector<VideoAnnotations> gt;
  for (const auto& v : videos) gt.push_back(v.ann);

  io::CsvWriter csv(rc.out_dir + "/eval.csv",
                    {"postproc", "delta1_map", "delta2_map"});
  std::vector<std::string> artifacts{"eval.csv"};

  if (!rc.eval.predictions.empty()) {
    const auto events = infer::load_predictions(rc.eval.predictions);
    const int C = rc.dataset.classes;
    const double d1 = eval::map_at(events, gt, C, 1);
    const double d2 = eval::map_at(events, gt, C, 2);
    csv.write_row({"file", io::fmt_num(d1), io::fmt_num(d2)});
    std::cout << "[eval] predictions file: mAP d1 " << io::fmt_num(d1) << ", d2 "
              << io::fmt_num(d2) << "\n";
    io::write_manifest(rc.out_dir, rc.resolved.dump(2), rc.seed, artifacts);
    return;
  }

  const std::string ckpt = rc.eval.checkpoint.empty()
                               ? rc.out_dir + "/checkpoint_best.tdcp"
                               : rc.eval.checkpoint;
  LoadedModel lm = model_from_checkpoint(ckpt);
  eval::EvalCfg ec = make_eval_cfg(rc);
  // Dilation-trained checkpoints carry no usable displacement signal.
  if (lm.rc.train.label_dilation >= 0) ec.use_displacement = false;

  if (lm.m->cfg().temporal_module == model::TemporalModule::sgp_pyramid) {
    const auto [d1, d2] = model_map_pair(*lm.m, videos, ec);
    csv.write_row({"snms", io::fmt_num(d1), io::fmt_num(d2)});
    std::cout << "[eval] pyramid cumulative: mAP d1 " << io::fmt_num(d1)
              << ", d2 " << io::fmt_num(d2) << "\n";
    io::write_manifest(rc.out_dir, rc.resolved.dump(2), rc.seed, artifacts);
    return;
  }

  // Stitch every video once, then score each suppression mode on the same
  // candidates; the paper-style comparison needs them side by side.
  const infer::ClipRunner runner = [&lm](const FeatureMapSeq<float>& clip) {
    model::TdeedModel<float>::Cache cache;
    return lm.m->forward(clip, cache);
  };
  std::vector<std::vector<SpottedEvent>> cands;
  for (const auto& v : videos) {
    auto sr = infer::stitch(v, runner, lm.m->cfg().L, ec.overlap);
    for (const auto& w : sr.warnings) std::cout << "[eval] warning: " << w << "\n";
    if (!ec.use_displacement) sr.preds.disp.setZero();
    cands.push_back(infer::decode_candidates(sr.preds, v.ann.video_id, ec.threshold));
  }

  const int C = lm.m->cfg().C;
  std::vector<SpottedEvent> chosen;
  for (const std::string mode : {"snms", "nms", "none"}) {
    eval::EvalCfg mc = ec;
    mc.suppress = mode;
    std::vector<SpottedEvent> all;
    for (const auto& cv : cands) {
      const auto kept = eval::suppress_events(cv, mc);
      all.insert(all.end(), kept.begin(), kept.end());
    }
    const double d1 = eval::map_at(all, gt, C, 1);
    const double d2 = eval::map_at(all, gt, C, 2);
    csv.write_row({mode, io::fmt_num(d1), io::fmt_num(d2)});
    std::cout << "[eval] " << mode << ": mAP d1 " << io::fmt_num(d1) << ", d2 "
              << io::fmt_num(d2) << "\n";
    if (mode == ec.suppress) chosen = std::move(all);
  }
  infer::save_predictions(rc.out_dir + "/predictions.json", chosen);
  artifacts.push_back("predictions.json");
  io::write_manifest(rc.out_dir, rc.resolved.dump(2), rc.seed, artifacts);
}

void cmd_ablate(const RunConfig& rc) {
  const auto cells = study_cells(rc.ablate.study);
  if (rc.ablate.study == "clip_length")
    check_config(rc.dataset.video_length >= 4 * 200,
                 "ablate: the clip_length study needs dataset.video_length >= 800");
  fs::create_directories(rc.out_dir);
  ensure_dataset(rc);
  Splits splits;
  splits.train = load_split(rc, "train");
  splits.val = load_split(rc, "val");
  splits.test = load_split(rc, "test");
  check_config(!splits.test.empty(), "ablate: needs a non-empty test split");

  const std::string runs_path = rc.out_dir + "/study_" + rc.ablate.study + "_runs.csv";
  const std::string agg_path = rc.out_dir + "/study_" + rc.ablate.study + ".csv";
  io::CsvWriter runs(runs_path, {"study", "cell", "seed", "delta1_map", "delta2_map"});
  io::CsvWriter agg(agg_path,
                    {"study", "cell", "seed_count", "delta1_map_mean", "delta2_map_mean"});

  std::vector<double> cell_means;
  for (const auto& cell : cells) {
    double sum1 = 0.0, sum2 = 0.0;
    for (int s = 0; s < rc.ablate.seeds; ++s) {
      const RunConfig cell_rc = cell_config(rc, cell, rc.seed + static_cast<std::uint64_t>(s));
      const std::string dir = train_cached(cell_rc, splits, rc.out_dir);
      LoadedModel lm = model_from_checkpoint(dir + "/checkpoint_best.tdcp");
      eval::EvalCfg ec = make_eval_cfg(cell_rc);
      const auto [d1, d2] = model_map_pair(*lm.m, splits.test, ec);
      runs.write_row({rc.ablate.study, cell.name, std::to_string(cell_rc.seed),
                      io::fmt_num(d1), io::fmt_num(d2)});
      std::cout << "[ablate] " << cell.name << " seed " << cell_rc.seed
                << ": mAP d1 " << io::fmt_num(d1) << "\n";
      sum1 += d1;
      sum2 += d2;
    }
    const double mean1 = sum1 / rc.ablate.seeds;
    agg.write_row({rc.ablate.study, cell.name, std::to_string(rc.ablate.seeds),
                   io::fmt_num(mean1), io::fmt_num(sum2 / rc.ablate.seeds)});
    cell_means.push_back(mean1);
  }

  // x is the cell's row index in the aggregated CSV.
  const io::CsvTable t = io::read_csv(agg_path);
  io::Series mean{rc.ablate.study, {}, csv_column(t, "delta1_map_mean")};
  for (std::size_t i = 0; i < mean.y.size(); ++i) mean.x.push_back(static_cast<double>(i));
  const std::string plot_path = rc.out_dir + "/study_" + rc.ablate.study + ".svg";
  io::write_line_chart(plot_path, "ablation: " + rc.ablate.study, "cell index",
                       "mAP (delta=1)", {mean});

  io::write_manifest(rc.out_dir, rc.resolved.dump(2), rc.seed,
                     {"study_" + rc.ablate.study + "_runs.csv",
                      "study_" + rc.ablate.study + ".csv",
                      "study_" + rc.ablate.study + ".svg"});
}

void cmd_analyze(const RunConfig& rc) {
  fs::create_directories(rc.out_dir);
  ensure_dataset(rc);
  const auto videos = load_split(rc, rc.analyze.split);
  check_config(!videos.empty(), "analyze: split '" + rc.analyze.split + "' is empty");
  const std::string ckpt = rc.analyze.checkpoint.empty()
                               ? rc.out_dir + "/checkpoint_best.tdcp"
                               : rc.analyze.checkpoint;
  LoadedModel lm = model_from_checkpoint(ckpt);

  if (rc.analyze.kind == "discriminability") {
    const int L = lm.m->cfg().L;
    std::vector<FeatureMapSeq<float>> probes;
    for (const auto& v : videos) {
      if (static_cast<int>(probes.size()) >= rc.analyze.num_probes) break;
      check_config(v.ann.length >= L, "analyze: video shorter than a clip");
      probes.push_back(v.clip((v.ann.length - L) / 2, L));
    }
    const auto profile = eval::discriminability_profile(*lm.m, probes);
    const std::string csv_path = rc.out_dir + "/analysis_discriminability.csv";
    io::CsvWriter csv(csv_path, {"stage", "mean_similarity"});
    for (const auto& s : profile)
      csv.write_row({s.stage, io::fmt_num(s.mean_similarity)});

    const io::CsvTable t = io::read_csv(csv_path);
    io::Series sim{"mean_cosine", {}, csv_column(t, "mean_similarity")};
    for (std::size_t i = 0; i < sim.y.size(); ++i) sim.x.push_back(static_cast<double>(i));
    io::write_line_chart(rc.out_dir + "/analysis_discriminability.svg",
                         "token similarity by stage", "stage index",
                         "mean cosine similarity", {sim});
    io::write_manifest(rc.out_dir, rc.resolved.dump(2), rc.seed,
                       {"analysis_discriminability.csv",
                        "analysis_discriminability.svg"});
    std::cout << "[analyze] discriminability: " << profile.size() << " stages\n";
    return;
  }

  check_config(lm.m->cfg().temporal_module == model::TemporalModule::sgp_pyramid,
               "analyze: pyramid_layers needs an sgp_pyramid checkpoint");
  eval::PyramidEvalCfg pc;
  pc.delta = rc.analyze.delta;
  pc.threshold = rc.eval.threshold;
  pc.window = rc.eval.window;
  pc.final_threshold = rc.eval.final_threshold;
  const auto layers = eval::pyramid_layer_map(*lm.m, videos, pc);
  const std::string csv_path = rc.out_dir + "/analysis_pyramid.csv";
  io::CsvWriter csv(csv_path, {"layer", "standalone_map", "cumulative_map"});
  for (const auto& r : layers)
    csv.write_row({std::to_string(r.layer), io::fmt_num(r.standalone_map),
                   io::fmt_num(r.cumulative_map)});

  const io::CsvTable t = io::read_csv(csv_path);
  io::Series alone{"standalone", csv_column(t, "layer"),
                   csv_column(t, "standalone_map")};
  io::Series cum{"cumulative", csv_column(t, "layer"),
                 csv_column(t, "cumulative_map")};
  io::write_line_chart(rc.out_dir + "/analysis_pyramid.svg",
                       "pyramid per-layer mAP", "layer",
                       "mAP (delta=" + std::to_string(pc.delta) + ")",
                       {alone, cum});
  io::write_manifest(rc.out_dir, rc.resolved.dump(2), rc.seed,
                     {"analysis_pyramid.csv", "analysis_pyramid.svg"});
  std::cout << "[analyze] pyramid_layers: " << layers.size() << " layers\n";
}

}  // namespace tdeed::cli
