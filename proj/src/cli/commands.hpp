// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "cli/config.hpp"

namespace tdeed::cli {

// Each command writes its artifacts plus a manifest under rc.out_dir (the
// dataset carries its own manifest) and throws ConfigError / IoError /
// std::runtime_error on failure; the entry point maps those to exit codes.

void cmd_gen(const RunConfig& rc);
void cmd_train(const RunConfig& rc);
void cmd_eval(const RunConfig& rc);
void cmd_ablate(const RunConfig& rc);
void cmd_analyze(const RunConfig& rc);

}  // namespace tdeed::cli
