// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <vector>

#include "corpus/corpus.hpp"
#include "dsp/audio.hpp"
#include "pipeline/run_config.hpp"
#include "training/trainer.hpp"
#include "translit/translit.hpp"

namespace convasr::pipeline {

struct DataSplits {
  std::vector<corpus::ManifestEntry> train;
  std::vector<corpus::ManifestEntry> eval;
};

// Splits each manifest with its own train fraction and concatenates the
// parts in manifest order.
DataSplits split_manifests(const RunConfig& config);

// Decodes, resamples and label-encodes every entry. Throws on the first bad
// row, naming it.
std::vector<train::Utterance> load_utterances(const std::vector<corpus::ManifestEntry>& entries,
                                              const std::filesystem::path& audio_root,
                                              const translit::TranslitTable& table,
                                              const translit::Alphabet& alphabet,
                                              int sample_rate_hz);

// Every *.wav directly inside `dir`, sorted by file name, resampled.
std::vector<dsp::AudioClip> load_noise_dir(const std::filesystem::path& dir, int sample_rate_hz);

}  // namespace convasr::pipeline
