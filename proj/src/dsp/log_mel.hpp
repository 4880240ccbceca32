// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <vector>

#include "dsp/audio.hpp"

namespace convasr::dsp {

struct FeatureConfig {
  // Rate every clip is resampled to before framing.
  int sample_rate_hz = 16000;
  double frame_len_ms = 25.0;
  double frame_hop_ms = 10.0;
  int mel_bins = 40;
  int fft_size = 512;
  double fmin_hz = 20.0;
  double fmax_hz = 7600.0;
  double log_floor = 1e-10;

  std::size_t window_samples() const;
  std::size_t hop_samples() const;
  // Throws InvalidArgument naming the first violated constraint.
  void validate() const;

  bool operator==(const FeatureConfig&) const = default;
};

// T x M log-mel energies, row-major by frame.
struct MelSpectrogram {
  std::size_t num_frames = 0;
  std::size_t num_bins = 0;
  std::vector<double> frames;
  FeatureConfig config;
  int source_sample_rate_hz = 0;

  double at(std::size_t t, std::size_t m) const { return frames[t * num_bins + m]; }
};

// 1 + floor((n - win) / hop) for n >= win, else 0.
std::size_t frame_count(std::size_t num_samples, std::size_t win, std::size_t hop);

// Triangular HTK-scale filterbank over the fft_size / 2 + 1 magnitude bins,
// stored row-major (mel_bins rows).
std::vector<double> mel_filterbank(const FeatureConfig& config);

// Hann window, periodic form: 0.5 - 0.5 cos(2 pi n / win).
std::vector<double> hann_window(std::size_t win);

// Owns the FFT plan and the filterbank for one configuration. Not safe to
// share across threads; create one extractor per worker.
class LogMelExtractor {
 public:
  explicit LogMelExtractor(const FeatureConfig& config);
  ~LogMelExtractor();
  LogMelExtractor(const LogMelExtractor&) = delete;
  LogMelExtractor& operator=(const LogMelExtractor&) = delete;
  LogMelExtractor(LogMelExtractor&&) noexcept;
  LogMelExtractor& operator=(LogMelExtractor&&) noexcept;

  const FeatureConfig& config() const { return config_; }

  // The clip must already be at config().sample_rate_hz.
  MelSpectrogram compute(const AudioClip& clip);

 private:
  struct Fft;
  FeatureConfig config_;
  std::vector<double> window_;
  std::vector<double> filterbank_;
  std::unique_ptr<Fft> fft_;
};

MelSpectrogram log_mel(const AudioClip& clip, const FeatureConfig& config);

// HTK mel scale.
inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace convasr::dsp
