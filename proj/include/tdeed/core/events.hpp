// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace tdeed {

/// Ground-truth event: class_id is 1-based, 0 is reserved for background.
struct EventAnnotation {
  int frame = 0;
  int class_id = 1;
};

/// One annotated video's metadata (frames live in the packed frame store).
struct VideoAnnotations {
  std::string video_id;
  int length = 0;
  double fps = 25.0;
  std::vector<EventAnnotation> events;  // sorted by frame, unique frames
};

/// A decoded event candidate or final detection.
struct SpottedEvent {
  std::string video_id;
  int frame = 0;
  int class_id = 1;
  double score = 1.0;
};

}  // namespace tdeed
