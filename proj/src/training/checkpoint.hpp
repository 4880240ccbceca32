// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dsp/log_mel.hpp"
#include "model/network.hpp"
#include "training/adam.hpp"

namespace convasr::train {

// Binary layout (all integers little-endian):
//   "CVASRCKP"                          8-byte magic
//   u32 format_version
//   u32 record_count
//   record_count x {
//     u32 name_length, name bytes (UTF-8)
//     u32 rank, rank x u64 dims
//     prod(dims) x f64 (IEEE-754 binary64, little-endian)
//   }
//   u64 FNV-1a hash of every preceding byte
//
// Integers (configuration, step counters, seed) are stored as exact f64
// scalars; the transliteration table and alphabet as codepoint vectors.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::uint32_t format_version = kCheckpointVersion;
  model::NetworkParams params;  // includes the network configuration
  AdamState optimizer;
  long step = 0;
  // Complete generator state: every training draw derives from (seed, step).
  std::uint64_t seed = 0;
  dsp::FeatureConfig features;
  std::vector<char> alphabet;  // blank excluded
  std::vector<std::pair<char32_t, char>> translit_pairs;

  bool operator==(const Checkpoint&) const = default;
};

struct Record {
  std::string name;
  std::vector<std::uint64_t> shape;
  std::vector<double> data;
};

std::vector<std::uint8_t> serialize(const Checkpoint& c);
// Throws CorruptCheckpoint or VersionMismatch; never returns partial state.
Checkpoint deserialize(const std::vector<std::uint8_t>& bytes);

// Writes to a sibling temporary file and renames it into place.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace convasr::train
