// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "tdeed/core/events.hpp"
#include "tdeed/data/generator.hpp"

namespace tdeed::data {

/// Packed binary frame file. Layout: magic "PESV1", a flag byte selecting
/// the sample type (0 = u8, 1 = little-endian f32), then u32 frame count,
/// height, width, channels (all little-endian), then the payload in the
/// in-memory order (frame-major, pixels row-major, channels interleaved).
/// u8 samples map to [0,1] as v/255.
void write_frames(const std::string& path, const SyntheticVideo& video);
void read_frames(const std::string& path, SyntheticVideo& video);

/// One JSON document for a whole split:
/// {"videos":[{"id":., "length":., "fps":., "events":[{"frame":., "class":.}]}]}
void save_annotations(const std::string& path,
                      const std::vector<VideoAnnotations>& videos);
std::vector<VideoAnnotations> load_annotations(const std::string& path);

/// Directory layout: <dir>/annotations.json plus <dir>/<video_id>.pes.
void save_dataset(const std::string& dir,
                  const std::vector<SyntheticVideo>& videos);
std::vector<SyntheticVideo> load_dataset(const std::string& dir);

}  // namespace tdeed::data
