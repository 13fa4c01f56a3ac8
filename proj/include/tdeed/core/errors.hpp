// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace tdeed {

/// Invalid user-supplied configuration (bad field values, schema violations).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A caller broke an API precondition (shape mismatch, non-finite input, ...).
struct ContractError : std::runtime_error {
  explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

/// An index or window fell outside the addressed object.
struct RangeError : std::runtime_error {
  explicit RangeError(const std::string& msg) : std::runtime_error(msg) {}
};

/// File or serialization failure.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

inline void check_config(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}
inline void check_contract(bool ok, const std::string& msg) {
  if (!ok) throw ContractError(msg);
}
inline void check_range(bool ok, const std::string& msg) {
  if (!ok) throw RangeError(msg);
}
inline void check_io(bool ok, const std::string& msg) {
  if (!ok) throw IoError(msg);
}

}  // namespace tdeed
