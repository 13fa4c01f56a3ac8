// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "tdeed/core/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"tdeed: synthetic precise event spotting, end to end"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  std::string resume;
  app.add_option("-c,--config", config_path,
                 "run config (JSON, '//' comments allowed); defaults apply when omitted");
  app.add_option("-s,--set", sets,
                 "override one leaf key, e.g. --set train.epochs=3 (repeatable)");

  CLI::App* gen = app.add_subcommand("gen", "generate the dataset splits");
  CLI::App* train = app.add_subcommand("train", "train a model");
  train->add_option("--resume", resume, "checkpoint to continue from");
  CLI::App* eval = app.add_subcommand("eval", "score a checkpoint or predictions file");
  CLI::App* ablate = app.add_subcommand("ablate", "run one ablation study");
  CLI::App* analyze =
      app.add_subcommand("analyze", "discriminability or pyramid layer analysis");
  for (CLI::App* sub : {gen, train, eval, ablate, analyze}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!resume.empty()) sets.push_back("train.resume=" + resume);
    const tdeed::cli::RunConfig rc = tdeed::cli::load_run_config(config_path, sets);
    if (gen->parsed()) tdeed::cli::cmd_gen(rc);
    if (train->parsed()) tdeed::cli::cmd_train(rc);
    if (eval->parsed()) tdeed::cli::cmd_eval(rc);
    if (ablate->parsed()) tdeed::cli::cmd_ablate(rc);
    if (analyze->parsed()) tdeed::cli::cmd_analyze(rc);
    return 0;
  } catch (const tdeed::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
