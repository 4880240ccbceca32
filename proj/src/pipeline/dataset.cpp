// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#include "pipeline/dataset.hpp"

#include <algorithm>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace convasr::pipeline {

DataSplits split_manifests(const RunConfig& config) {
  DataSplits out;
  for (std::size_t i = 0; i < config.manifests.size(); ++i) {
    const auto& spec = config.manifests[i];
    const auto entries = corpus::load_manifest(spec.path);
    if (entries.empty()) continue;
    auto [train, eval] =
        corpus::split(entries, {spec.train_fraction, derive_seed(config.split_seed, i)});
    out.train.insert(out.train.end(), train.begin(), train.end());
    out.eval.insert(out.eval.end(), eval.begin(), eval.end());
  }
  return out;
}

std::vector<train::Utterance> load_utterances(const std::vector<corpus::ManifestEntry>& entries,
                                              const std::filesystem::path& audio_root,
                                              const translit::TranslitTable& table,
                                              const translit::Alphabet& alphabet,
                                              int sample_rate_hz) {
  std::vector<train::Utterance> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    try {
      train::Utterance u;
      u.id = e.audio_path;
      u.clip = dsp::resample(dsp::read_wav(audio_root / e.audio_path), sample_rate_hz);
      u.labels = translit::encode_labels(table.to_roman(e.transcript), alphabet);
      out.push_back(std::move(u));
    } catch (const Error& err) {
      throw InvalidArgument("manifest row '" + e.audio_path + "': " + err.what());
    }
  }
  return out;
}

std::vector<dsp::AudioClip> load_noise_dir(const std::filesystem::path& dir, int sample_rate_hz) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".wav") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<dsp::AudioClip> clips;
  for (const auto& f : files) {
    auto clip = dsp::resample(dsp::read_wav(f), sample_rate_hz);
    if (dsp::mean_power(clip.samples) == 0.0) {
      throw InvalidArgument("noise file " + f.string() + " is silent");
    }
    clips.push_back(std::move(clip));
  }
  return clips;
}

}  // namespace convasr::pipeline
