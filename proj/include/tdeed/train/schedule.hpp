// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <numbers>

#include "tdeed/core/errors.hpp"

namespace tdeed::train {

/// Linear warmup to base_lr over warmup_epochs, then cosine decay to zero
/// across the remaining epochs. Continuous at the boundary: both sides
/// evaluate to base_lr.
inline double lr_at(int epoch, int epochs, int warmup_epochs, double base_lr) {
  check_config(epochs >= 1 && warmup_epochs >= 0 && warmup_epochs < epochs,
               "schedule: need 0 <= warmup < epochs");
  check_range(epoch >= 0 && epoch < epochs, "schedule: epoch out of range");
  if (epoch < warmup_epochs)
    return base_lr * static_cast<double>(epoch + 1) / warmup_epochs;
  const double t = static_cast<double>(epoch - warmup_epochs) /
                   static_cast<double>(epochs - warmup_epochs);
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

}  // namespace tdeed::train
