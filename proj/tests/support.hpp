// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

// Fixtures shared by the unit, integration and acceptance tests.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "common/rng.hpp"
#include "dsp/audio.hpp"
#include "model/network.hpp"
#include "training/trainer.hpp"
#include "translit/translit.hpp"

namespace convasr::testing {

namespace fs = std::filesystem;

inline fs::path bundled_table() { return fs::path(CONVASR_DATA_DIR) / "buckwalter.tsv"; }

// Fresh, empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("convasr-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline dsp::AudioClip silence(double seconds, int rate = 16000) {
  return {std::vector<double>(static_cast<std::size_t>(std::lround(seconds * rate)), 0.0), rate};
}

inline dsp::AudioClip sine(double hz, double seconds, double amplitude = 1.0, int rate = 16000) {
  dsp::AudioClip c{std::vector<double>(static_cast<std::size_t>(std::lround(seconds * rate))),
                   rate};
  for (std::size_t n = 0; n < c.samples.size(); ++n) {
    c.samples[n] = amplitude * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(n) / rate);
  }
  return c;
}

// ---- synthetic tone corpus ---------------------------------------------------
//
// Every roman symbol is rendered as a steady tone at its own frequency, with
// short pauses between symbols. A faint seeded noise floor runs under the
// whole clip.

inline constexpr const char* kToneSymbols = "bstklmn";

inline double tone_hz(char symbol) {
  const std::string symbols = kToneSymbols;
  const auto k = static_cast<double>(symbols.find(symbol));
  return 350.0 * std::pow(1.45, k);
}

inline dsp::AudioClip render_tones(const std::string& roman, std::uint64_t noise_seed = 1,
                                   int rate = 16000) {
  constexpr double kTone = 0.12;
  constexpr double kGap = 0.06;
  constexpr double kEdge = 0.08;
  std::vector<double> samples(static_cast<std::size_t>(kEdge * rate), 0.0);
  for (char c : roman) {
    const auto tone = sine(tone_hz(c), kTone, 0.5, rate);
    samples.insert(samples.end(), tone.samples.begin(), tone.samples.end());
    samples.insert(samples.end(), static_cast<std::size_t>(kGap * rate), 0.0);
  }
  samples.insert(samples.end(), static_cast<std::size_t>(kEdge * rate), 0.0);
  Rng rng(noise_seed);
  for (double& s : samples) s += rng.uniform(-0.017, 0.017);
  return {std::move(samples), rate};
}

// Five distinct transcripts of three to five symbols.
inline std::vector<std::string> tone_transcripts() {
  return {"bsk", "tlmn", "kbtls", "nml", "stbn"};
}

inline std::vector<train::Utterance> tone_corpus(const translit::Alphabet& alphabet) {
  std::vector<train::Utterance> out;
  std::uint64_t i = 0;
  for (const auto& t : tone_transcripts()) {
    out.push_back({"utt" + std::to_string(i), render_tones(t, i + 1),
                   translit::encode_labels(t, alphabet)});
    ++i;
  }
  return out;
}

// Small two-stack network for fast training tests.
inline model::NetworkConfig small_network(int alphabet_size, int stacks = 2) {
  model::NetworkConfig c;
  c.num_stacks = stacks;
  c.residual_channels = 16;
  c.skip_channels = 32;
  c.alphabet_size = alphabet_size;
  return c;
}

// Writes the tone corpus as WAV files plus an Arabic-script manifest and a run
// configuration into `dir`. Returns the configuration path.
struct CorpusFiles {
  fs::path config;
  fs::path manifest;
  std::vector<fs::path> wavs;
};

inline CorpusFiles write_tone_corpus(const fs::path& dir, const std::string& training_json,
                                     double train_fraction = 1.0) {
  const auto table = translit::TranslitTable::load(bundled_table());
  CorpusFiles files;
  fs::create_directories(dir / "audio");
  std::string manifest;
  std::uint64_t i = 0;
  for (const auto& t : tone_transcripts()) {
    const std::string name = "utt" + std::to_string(i) + ".wav";
    dsp::write_wav(dir / "audio" / name, render_tones(t, i + 1));
    files.wavs.push_back(dir / "audio" / name);
    manifest += name + "," + table.to_arabic(t) + "\n";
    ++i;
  }
  files.manifest = dir / "manifest.csv";
  write_text(files.manifest, manifest);
  files.config = dir / "config.json";
  write_text(files.config, R"({
  "network": {"num_stacks": 2, "residual_channels": 16, "skip_channels": 32},
  "training": )" + training_json + R"(,
  "data": {"audio_root": "audio", "split_seed": 4,
           "manifests": [{"path": "manifest.csv", "train_fraction": )" +
                               std::to_string(train_fraction) + R"(}]},
  "output_dir": "out"
})");
  return files;
}

}  // namespace convasr::testing
