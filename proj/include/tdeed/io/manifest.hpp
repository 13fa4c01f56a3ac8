// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tdeed::io {

/// FNV-1a 64-bit hash, used for config and artifact fingerprints.
inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  return fnv1a64(s.data(), s.size());
}

std::uint64_t hash_file(const std::string& path);

/// Writes <dir>/manifest.json recording the config hash, seed, and an
/// FNV-1a fingerprint per artifact, so re-runs can be compared at a glance.
void write_manifest(const std::string& dir, const std::string& config_json,
                    std::uint64_t seed, const std::vector<std::string>& artifacts);

}  // namespace tdeed::io
