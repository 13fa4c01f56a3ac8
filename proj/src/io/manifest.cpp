// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#include "tdeed/io/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "tdeed/core/errors.hpp"

namespace tdeed::io {

std::uint64_t hash_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  check_io(static_cast<bool>(is), "cannot open for hashing: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  std::vector<char> buf(1 << 16);
  while (is) {
    is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    h = fnv1a64(buf.data(), static_cast<std::size_t>(is.gcount()), h);
  }
  return h;
}

void write_manifest(const std::string& dir, const std::string& config_json,
                    std::uint64_t seed, const std::vector<std::string>& artifacts) {
  nlohmann::json doc;
  char hex[19];
  std::snprintf(hex, sizeof(hex), "0x%016llx",
                static_cast<unsigned long long>(fnv1a64(config_json)));
  doc["config_hash"] = hex;
  doc["seed"] = seed;
  doc["artifacts"] = nlohmann::json::array();
  for (const auto& a : artifacts) {
    std::snprintf(hex, sizeof(hex), "0x%016llx",
                  static_cast<unsigned long long>(hash_file(dir + "/" + a)));
    doc["artifacts"].push_back({{"path", a}, {"fnv1a64", hex}});
  }
  std::ofstream os(dir + "/manifest.json");
  check_io(static_cast<bool>(os), "cannot open for writing: " + dir + "/manifest.json");
  os << doc.dump(2) << "\n";
  check_io(static_cast<bool>(os), "write failed: " + dir + "/manifest.json");
}

}  // namespace tdeed::io
