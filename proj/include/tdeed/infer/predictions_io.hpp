// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "tdeed/core/events.hpp"

namespace tdeed::infer {

/// Predictions file consumed by evaluation:
/// {"videos":[{"video_id":., "events":[{"frame":., "class":., "score":.}]}]}
void save_predictions(const std::string& path,
                      const std::vector<SpottedEvent>& events);
std::vector<SpottedEvent> load_predictions(const std::string& path);

}  // namespace tdeed::infer
