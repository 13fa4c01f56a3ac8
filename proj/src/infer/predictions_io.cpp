// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#include "tdeed/infer/predictions_io.hpp"

#include <fstream>
#include <map>

#include <json.hpp>

#include "tdeed/core/errors.hpp"

namespace tdeed::infer {

void save_predictions(const std::string& path,
                      const std::vector<SpottedEvent>& events) {
  // Group by video, preserving first-appearance order of the videos and the
  // caller's event order inside each video.
  std::vector<std::string> order;
  std::map<std::string, std::vector<const SpottedEvent*>> by_video;
  for (const auto& e : events) {
    auto [it, fresh] = by_video.try_emplace(e.video_id);
    if (fresh) order.push_back(e.video_id);
    it->second.push_back(&e);
  }
  nlohmann::json doc;
  doc["videos"] = nlohmann::json::array();
  for (const auto& id : order) {
    nlohmann::json jv;
    jv["video_id"] = id;
    jv["events"] = nlohmann::json::array();
    for (const SpottedEvent* e : by_video[id])
      jv["events"].push_back(
          {{"frame", e->frame}, {"class", e->class_id}, {"score", e->score}});
    doc["videos"].push_back(std::move(jv));
  }
  std::ofstream os(path);
  check_io(static_cast<bool>(os), "cannot open for writing: " + path);
  os << doc.dump(2) << "\n";
  check_io(static_cast<bool>(os), "write failed: " + path);
}

std::vector<SpottedEvent> load_predictions(const std::string& path) {
  std::ifstream is(path);
  check_io(static_cast<bool>(is), "cannot open for reading: " + path);
  nlohmann::json doc;
  try {
    is >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad predictions JSON in " + path + ": " + e.what());
  }
  check_io(doc.contains("videos") && doc["videos"].is_array(),
           "predictions JSON missing 'videos' array: " + path);
  std::vector<SpottedEvent> out;
  for (const auto& jv : doc["videos"]) {
    const auto id = jv.at("video_id").get<std::string>();
    for (const auto& je : jv.at("events"))
      out.push_back({id, je.at("frame").get<int>(), je.at("class").get<int>(),
                     je.at("score").get<double>()});
  }
  return out;
}

}  // namespace tdeed::infer
