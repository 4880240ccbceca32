// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <vector>

#include "common/rng.hpp"

namespace convasr::dsp {

// Mono waveform. Samples are nominally in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate_hz = 16000;

  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
  // Throws InvalidArgument when the rate is non-positive or a sample is not
  // finite.
  void validate() const;
};

// Decodes PCM 16-bit little-endian RIFF/WAVE with 1 or 2 channels. Stereo is
// averaged to mono and samples are scaled by 1/32768.
// Throws WavFormatError for a malformed container and UnsupportedAudio for any
// other codec, bit depth or channel count.
AudioClip read_wav(const std::filesystem::path& path);
AudioClip decode_wav(std::span<const std::uint8_t> bytes);

// Writes 16-bit mono PCM; samples are clamped to [-1, 1) before quantization.
void write_wav(const std::filesystem::path& path, const AudioClip& clip);

// Linear-interpolation rate conversion. Output length is
// round(N * target / source); identity (exact copy) when the rates match.
AudioClip resample(const AudioClip& clip, int target_hz = 16000);

// Sentinel for mix_noise meaning "do not add noise".
inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

// Adds `noise` at the requested signal-to-noise ratio (mean-square powers).
// The noise is read cyclically from a random offset so it covers the clip
// whatever the relative lengths; the sum is clamped to [-1, 1].
AudioClip mix_noise(const AudioClip& clip, const AudioClip& noise, double snr_db, Rng& rng);

// Time-axis stretch by a factor drawn uniformly from [lo, hi]. A factor f
// gives round(N * f) samples, sample j read at input position j / f.
AudioClip random_stretch(const AudioClip& clip, std::array<double, 2> factor_range, Rng& rng);

// The deterministic core of random_stretch.
AudioClip stretch(const AudioClip& clip, double factor);

double mean_power(std::span<const double> samples);

}  // namespace convasr::dsp
