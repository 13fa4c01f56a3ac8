// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#include "tdeed/data/frame_store.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "tdeed/core/errors.hpp"

namespace tdeed::data {
namespace {

constexpr char kMagic[5] = {'P', 'E', 'S', 'V', '1'};

void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff),
               static_cast<char>((v >> 24) & 0xff)};
  os.write(b, 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_frames(const std::string& path, const SyntheticVideo& video) {
  std::ofstream os(path, std::ios::binary);
  check_io(static_cast<bool>(os), "cannot open for writing: " + path);
  os.write(kMagic, 5);
  os.put(0);  // u8 samples
  put_u32(os, static_cast<std::uint32_t>(video.ann.length));
  put_u32(os, static_cast<std::uint32_t>(video.h));
  put_u32(os, static_cast<std::uint32_t>(video.w));
  put_u32(os, 3);
  os.write(reinterpret_cast<const char*>(video.frames.data()),
           static_cast<std::streamsize>(video.frames.size()));
  check_io(static_cast<bool>(os), "write failed: " + path);
}

void read_frames(const std::string& path, SyntheticVideo& video) {
  std::ifstream is(path, std::ios::binary);
  check_io(static_cast<bool>(is), "cannot open for reading: " + path);
  char magic[5];
  is.read(magic, 5);
  check_io(is && std::equal(magic, magic + 5, kMagic),
           "not a PESV1 frame file: " + path);
  const int flag = is.get();
  check_io(flag == 0 || flag == 1, "unknown sample type flag: " + path);
  const int count = static_cast<int>(get_u32(is));
  const int h = static_cast<int>(get_u32(is));
  const int w = static_cast<int>(get_u32(is));
  const int channels = static_cast<int>(get_u32(is));
  check_io(channels == 3, "expected 3-channel frames: " + path);
  check_io(count == video.ann.length,
           "frame count disagrees with annotations: " + path);
  video.h = h;
  video.w = w;
  const std::size_t n = static_cast<std::size_t>(count) * 3 * h * w;
  video.frames.resize(n);
  if (flag == 0) {
    is.read(reinterpret_cast<char*>(video.frames.data()),
            static_cast<std::streamsize>(n));
  } else {
    std::vector<unsigned char> raw(n * 4);
    is.read(reinterpret_cast<char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t bits =
          static_cast<std::uint32_t>(raw[4 * i]) |
          (static_cast<std::uint32_t>(raw[4 * i + 1]) << 8) |
          (static_cast<std::uint32_t>(raw[4 * i + 2]) << 16) |
          (static_cast<std::uint32_t>(raw[4 * i + 3]) << 24);
      float f;
      static_assert(sizeof(f) == 4);
      std::memcpy(&f, &bits, 4);
      video.frames[i] = static_cast<std::uint8_t>(
          std::lround(std::clamp(f, 0.0f, 1.0f) * 255.0f));
    }
  }
  check_io(static_cast<bool>(is), "truncated frame file: " + path);
}

void save_annotations(const std::string& path,
                      const std::vector<VideoAnnotations>& videos) {
  nlohmann::json doc;
  doc["videos"] = nlohmann::json::array();
  for (const auto& v : videos) {
    nlohmann::json jv;
    jv["id"] = v.video_id;
    jv["length"] = v.length;
    jv["fps"] = v.fps;
    jv["events"] = nlohmann::json::array();
    for (const auto& e : v.events)
      jv["events"].push_back({{"frame", e.frame}, {"class", e.class_id}});
    doc["videos"].push_back(std::move(jv));
  }
  std::ofstream os(path);
  check_io(static_cast<bool>(os), "cannot open for writing: " + path);
  os << doc.dump(2) << "\n";
  check_io(static_cast<bool>(os), "write failed: " + path);
}

std::vector<VideoAnnotations> load_annotations(const std::string& path) {
  std::ifstream is(path);
  check_io(static_cast<bool>(is), "cannot open for reading: " + path);
  nlohmann::json doc;
  try {
    is >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad annotations JSON in " + path + ": " + e.what());
  }
  check_io(doc.contains("videos") && doc["videos"].is_array(),
           "annotations JSON missing 'videos' array: " + path);
  std::vector<VideoAnnotations> out;
  for (const auto& jv : doc["videos"]) {
    VideoAnnotations v;
    v.video_id = jv.at("id").get<std::string>();
    v.length = jv.at("length").get<int>();
    v.fps = jv.at("fps").get<double>();
    for (const auto& je : jv.at("events")) {
      EventAnnotation e;
      e.frame = je.at("frame").get<int>();
      e.class_id = je.at("class").get<int>();
      v.events.push_back(e);
    }
    out.push_back(std::move(v));
  }
  return out;
}

void save_dataset(const std::string& dir,
                  const std::vector<SyntheticVideo>& videos) {
  std::filesystem::create_directories(dir);
  std::vector<VideoAnnotations> anns;
  anns.reserve(videos.size());
  for (const auto& v : videos) {
    write_frames(dir + "/" + v.ann.video_id + ".pes", v);
    anns.push_back(v.ann);
  }
  save_annotations(dir + "/annotations.json", anns);
}

std::vector<SyntheticVideo> load_dataset(const std::string& dir) {
  const auto anns = load_annotations(dir + "/annotations.json");
  std::vector<SyntheticVideo> out;
  out.reserve(anns.size());
  for (const auto& a : anns) {
    SyntheticVideo v;
    v.ann = a;
    read_frames(dir + "/" + a.video_id + ".pes", v);
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace tdeed::data
