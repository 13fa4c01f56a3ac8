// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tdeed/core/events.hpp"
#include "tdeed/core/types.hpp"

namespace tdeed::data {

/// Parameters for the procedural event-spotting videos. Events are
/// instantaneous state changes of a moving sprite; each class needs a
/// different amount of temporal context to identify (documented by
/// context_scales, in frames).
struct GeneratorSpec {
  int num_videos = 10;
  int video_length = 400;
  int C = 4;
  double sparsity = 0.02;  // events per frame; annotated ratio of the video
  std::vector<int> context_scales = {2, 3, 8, 8};
  int height = 64;
  int width = 64;
  int clip_length = 100;  // sampling window the videos must comfortably fit
  double fps = 25.0;
  std::uint64_t seed = 7;
  std::string id_prefix = "video";
};

/// Frames are stored as u8 in exactly the on-disk layout (frame-major,
/// pixels row-major, channels interleaved) so persistence is a memcpy and
/// clips decode to float on demand.
struct SyntheticVideo {
  VideoAnnotations ann;
  int h = 0;
  int w = 0;
  std::vector<std::uint8_t> frames;

  FeatureMapSeq<float> clip(int start, int len) const;
  FeatureMapSeq<float> all_frames() const { return clip(0, ann.length); }
};

/// Event classes rendered by the generator, in class_id order 1..4.
enum class EventKind : int {
  color_flip = 1,  // sprite palette toggles; ~2 frames of context
  reverse = 2,     // velocity negates; ~3 frames
  split = 3,       // secondary sprite departs, then fades out; long context
  merge = 4,       // secondary approaches and coincides; long context
};

std::vector<SyntheticVideo> generate_dataset(const GeneratorSpec& spec);

}  // namespace tdeed::data
