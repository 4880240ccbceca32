// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dsp/log_mel.hpp"
#include "model/network.hpp"
#include "training/trainer.hpp"

namespace convasr::pipeline {

namespace fs = std::filesystem;

// Environment variable that replaces output_dir when set and non-empty.
inline constexpr const char* kOutputDirEnv = "CONVASR_OUTPUT_DIR";

struct ManifestSpec {
  fs::path path;
  // Fraction of this manifest used for training; the rest is held out.
  double train_fraction = 0.9;
};

// The JSON run configuration:
//
//   {
//     "features": { "sample_rate_hz", "frame_len_ms", "frame_hop_ms", "mel_bins",
//                   "fft_size", "fmin_hz", "fmax_hz", "log_floor" },
//     "network":  { "num_stacks", "blocks_per_stack", "dilations", "kernel_size",
//                   "residual_channels", "skip_channels" },
//     "training": { "learning_rate", "max_steps", "batch_size", "seed", "eval_every",
//                   "checkpoint_every",
//                   "augment": { "noise", "stretch", "snr_db": [lo, hi],
//                                "stretch_range": [lo, hi] } },
//     "data":     { "translit_table", "audio_root", "noise_dir", "split_seed",
//                   "manifests": [ { "path", "train_fraction" } ] },
//     "output_dir": "..."
//   }
//
// Every key is optional except data.manifests; omitted keys take the defaults
// of the corresponding structs. Relative paths resolve against the directory
// holding the configuration file. The network's mel_bins follows the feature
// section and its alphabet_size follows the transliteration table.
struct RunConfig {
  dsp::FeatureConfig features;
  model::NetworkConfig network;
  train::TrainConfig training;
  fs::path translit_table;
  fs::path audio_root;
  std::vector<ManifestSpec> manifests;
  std::optional<fs::path> noise_dir;
  std::uint64_t split_seed = 0;
  fs::path output_dir;

  static RunConfig parse(std::string_view json_text, const fs::path& base_dir);
  // Reads the file, applies the output-directory environment override and
  // validates. Throws ConfigError.
  static RunConfig load(const fs::path& path);

  // Structural invariants plus existence of every referenced input path.
  void validate() const;

  std::string to_json() const;
};

}  // namespace convasr::pipeline
