// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tdeed/core/errors.hpp"
#include "tdeed/nn/param.hpp"
#include "tdeed/train/adamw.hpp"

namespace tdeed::io {

/// Run state carried alongside the weights so training can resume exactly:
/// the full run configuration (opaque JSON text), the epoch to resume at,
/// and the early-stopping bookkeeping.
struct CheckpointMeta {
  std::string config_json = "{}";
  int next_epoch = 0;
  double best_val = -1.0;
  int epochs_since_best = 0;
  long long optimizer_steps = 0;
  bool has_optimizer = false;
};

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

// Matrices are serialized as f32 with explicit little-endian bytes in
// column-major element order, independent of the build's scalar type.
template <class S>
void put_mat(std::ostream& os, const MatX<S>& m) {
  std::vector<unsigned char> buf(static_cast<std::size_t>(m.size()) * 4);
  std::size_t o = 0;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const float f = static_cast<float>(m(r, c));
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      buf[o++] = static_cast<unsigned char>(bits & 0xff);
      buf[o++] = static_cast<unsigned char>((bits >> 8) & 0xff);
      buf[o++] = static_cast<unsigned char>((bits >> 16) & 0xff);
      buf[o++] = static_cast<unsigned char>((bits >> 24) & 0xff);
    }
  }
  os.write(reinterpret_cast<const char*>(buf.data()),
           static_cast<std::streamsize>(buf.size()));
}

template <class S>
void get_mat(std::istream& is, MatX<S>& m) {
  std::vector<unsigned char> buf(static_cast<std::size_t>(m.size()) * 4);
  is.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size()));
  std::size_t o = 0;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const std::uint32_t bits = static_cast<std::uint32_t>(buf[o]) |
                                 (static_cast<std::uint32_t>(buf[o + 1]) << 8) |
                                 (static_cast<std::uint32_t>(buf[o + 2]) << 16) |
                                 (static_cast<std::uint32_t>(buf[o + 3]) << 24);
      o += 4;
      float f;
      std::memcpy(&f, &bits, 4);
      m(r, c) = static_cast<S>(f);
    }
  }
}

inline constexpr char kMagic[5] = {'T', 'D', 'C', 'P', '1'};

}  // namespace detail

template <class S>
void save_checkpoint(const std::string& path, const nn::ParamRegistry<S>& reg,
                     const train::AdamW<S>* opt, const CheckpointMeta& meta) {
  std::ofstream os(path, std::ios::binary);
  check_io(static_cast<bool>(os), "cannot open for writing: " + path);
  os.write(detail::kMagic, 5);

  nlohmann::json jm;
  jm["config"] = nlohmann::json::parse(meta.config_json);
  jm["next_epoch"] = meta.next_epoch;
  jm["best_val"] = meta.best_val;
  jm["epochs_since_best"] = meta.epochs_since_best;
  jm["optimizer_steps"] = opt ? opt->step_count() : meta.optimizer_steps;
  jm["has_optimizer"] = opt != nullptr;
  const std::string ms = jm.dump();
  detail::put_u32(os, static_cast<std::uint32_t>(ms.size()));
  os.write(ms.data(), static_cast<std::streamsize>(ms.size()));

  detail::put_u32(os, static_cast<std::uint32_t>(reg.count()));
  for (const auto* p : reg.list()) {
    detail::put_u32(os, static_cast<std::uint32_t>(p->name.size()));
    os.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    detail::put_u32(os, static_cast<std::uint32_t>(p->value.rows()));
    detail::put_u32(os, static_cast<std::uint32_t>(p->value.cols()));
    detail::put_mat(os, p->value);
  }
  if (opt) {
    for (const auto& m : opt->moment1()) detail::put_mat(os, m);
    for (const auto& v : opt->moment2()) detail::put_mat(os, v);
  }
  check_io(static_cast<bool>(os), "write failed: " + path);
}

/// Reads only the metadata block, so callers can rebuild the model the
/// weights belong to before loading them.
inline CheckpointMeta read_checkpoint_meta(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  check_io(static_cast<bool>(is), "cannot open for reading: " + path);
  char magic[5];
  is.read(magic, 5);
  check_io(is && std::equal(magic, magic + 5, detail::kMagic),
           "not a checkpoint file: " + path);
  const std::uint32_t mlen = detail::get_u32(is);
  std::string ms(mlen, '\0');
  is.read(ms.data(), mlen);
  check_io(static_cast<bool>(is), "truncated checkpoint: " + path);
  nlohmann::json jm;
  try {
    jm = nlohmann::json::parse(ms);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad checkpoint metadata in " + path + ": " + e.what());
  }
  CheckpointMeta meta;
  meta.config_json = jm.at("config").dump();
  meta.next_epoch = jm.at("next_epoch").get<int>();
  meta.best_val = jm.at("best_val").get<double>();
  meta.epochs_since_best = jm.at("epochs_since_best").get<int>();
  meta.optimizer_steps = jm.at("optimizer_steps").get<long long>();
  meta.has_optimizer = jm.at("has_optimizer").get<bool>();
  return meta;
}

/// Restores weights (and optimizer moments when both the file and `opt`
/// carry them) into an already-built model. Names and shapes must match the
/// registry exactly; a mismatch means the config and the weights disagree.
template <class S>
CheckpointMeta load_checkpoint(const std::string& path, nn::ParamRegistry<S>& reg,
                               train::AdamW<S>* opt) {
  std::ifstream is(path, std::ios::binary);
  check_io(static_cast<bool>(is), "cannot open for reading: " + path);
  char magic[5];
  is.read(magic, 5);
  check_io(is && std::equal(magic, magic + 5, detail::kMagic),
           "not a checkpoint file: " + path);

  const std::uint32_t mlen = detail::get_u32(is);
  std::string ms(mlen, '\0');
  is.read(ms.data(), mlen);
  nlohmann::json jm;
  try {
    jm = nlohmann::json::parse(ms);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad checkpoint metadata in " + path + ": " + e.what());
  }
  CheckpointMeta meta;
  meta.config_json = jm.at("config").dump();
  meta.next_epoch = jm.at("next_epoch").get<int>();
  meta.best_val = jm.at("best_val").get<double>();
  meta.epochs_since_best = jm.at("epochs_since_best").get<int>();
  meta.optimizer_steps = jm.at("optimizer_steps").get<long long>();
  meta.has_optimizer = jm.at("has_optimizer").get<bool>();

  const std::uint32_t n = detail::get_u32(is);
  check_io(n == reg.count(), "checkpoint parameter count mismatch: " + path);
  for (auto* p : reg.list()) {
    const std::uint32_t nlen = detail::get_u32(is);
    std::string name(nlen, '\0');
    is.read(name.data(), nlen);
    const auto rows = static_cast<Eigen::Index>(detail::get_u32(is));
    const auto cols = static_cast<Eigen::Index>(detail::get_u32(is));
    check_io(name == p->name, "checkpoint parameter order mismatch at '" +
                                  p->name + "' (file has '" + name + "')");
    check_io(rows == p->value.rows() && cols == p->value.cols(),
             "checkpoint shape mismatch at '" + p->name + "'");
    detail::get_mat(is, p->value);
  }
  if (meta.has_optimizer && opt) {
    for (auto& m : opt->moment1()) detail::get_mat(is, m);
    for (auto& v : opt->moment2()) detail::get_mat(is, v);
    opt->set_step_count(meta.optimizer_steps);
  }
  check_io(static_cast<bool>(is), "truncated checkpoint: " + path);
  return meta;
}

}  // namespace tdeed::io
