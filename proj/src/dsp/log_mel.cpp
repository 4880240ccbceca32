// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#include "dsp/log_mel.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "common/error.hpp"

namespace convasr::dsp {

std::size_t FeatureConfig::window_samples() const {
  return static_cast<std::size_t>(std::llround(frame_len_ms * sample_rate_hz / 1000.0));
}

std::size_t FeatureConfig::hop_samples() const {
  return static_cast<std::size_t>(std::llround(frame_hop_ms * sample_rate_hz / 1000.0));
}

void FeatureConfig::validate() const {
  if (sample_rate_hz <= 0) throw InvalidArgument("feature sample rate must be positive");
  if (!(frame_len_ms > 0.0) || !(frame_hop_ms > 0.0)) {
    throw InvalidArgument("frame length and hop must be positive");
  }
  if (frame_hop_ms > frame_len_ms) throw InvalidArgument("frame hop exceeds frame length");
  if (hop_samples() == 0) throw InvalidArgument("frame hop is shorter than one sample");
  if (mel_bins <= 0) throw InvalidArgument("mel_bins must be positive");
  if (fft_size <= 0 || (fft_size & (fft_size - 1)) != 0) {
    throw InvalidArgument("fft_size must be a positive power of two");
  }
  if (static_cast<std::size_t>(fft_size) < window_samples()) {
    throw InvalidArgument("fft_size " + std::to_string(fft_size) + " is smaller than the " +
                          std::to_string(window_samples()) + "-sample window");
  }
  if (!(fmin_hz >= 0.0) || !(fmin_hz < fmax_hz) || fmax_hz > sample_rate_hz / 2.0) {
    throw InvalidArgument("mel band must satisfy 0 <= fmin < fmax <= sample_rate / 2");
  }
  if (!(log_floor > 0.0)) throw InvalidArgument("log_floor must be positive");
}

std::size_t frame_count(std::size_t num_samples, std::size_t win, std::size_t hop) {
  if (num_samples < win || win == 0) return 0;
  return 1 + (num_samples - win) / hop;
}

std::vector<double> hann_window(std::size_t win) {
  std::vector<double> w(win);
  for (std::size_t n = 0; n < win; ++n) {
    w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                static_cast<double>(win));
  }
  return w;
}

std::vector<double> mel_filterbank(const FeatureConfig& config) {
  const std::size_t bins = static_cast<std::size_t>(config.fft_size) / 2 + 1;
  const auto m = static_cast<std::size_t>(config.mel_bins);
  const double mel_lo = hz_to_mel(config.fmin_hz);
  const double mel_hi = hz_to_mel(config.fmax_hz);

  // m + 2 edge frequencies equally spaced on the mel axis.
  std::vector<double> edges(m + 2);
  for (std::size_t i = 0; i < m + 2; ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                      static_cast<double>(m + 1));
  }

  std::vector<double> weights(m * bins, 0.0);
  const double bin_hz = static_cast<double>(config.sample_rate_hz) / config.fft_size;
  for (std::size_t j = 0; j < m; ++j) {
    const double left = edges[j];
    const double center = edges[j + 1];
    const double right = edges[j + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      double w = 0.0;
      if (f > left && f <= center) {
        w = (f - left) / (center - left);
      } else if (f > center && f < right) {
        w = (right - f) / (right - center);
      }
      weights[j * bins + k] = w;
    }
  }
  return weights;
}

struct LogMelExtractor::Fft {
  explicit Fft(int n) : size(n) {
    in = fftw_alloc_real(static_cast<std::size_t>(n));
    out = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
    plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
  }
  ~Fft() {
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  int size;
  double* in;
  fftw_complex* out;
  fftw_plan plan;
};

LogMelExtractor::LogMelExtractor(const FeatureConfig& config) : config_(config) {
  config_.validate();
  window_ = hann_window(config_.window_samples());
  filterbank_ = mel_filterbank(config_);
  fft_ = std::make_unique<Fft>(config_.fft_size);
}

LogMelExtractor::~LogMelExtractor() = default;
LogMelExtractor::LogMelExtractor(LogMelExtractor&&) noexcept = default;
LogMelExtractor& LogMelExtractor::operator=(LogMelExtractor&&) noexcept = default;

MelSpectrogram LogMelExtractor::compute(const AudioClip& clip) {
  clip.validate();
  if (clip.sample_rate_hz != config_.sample_rate_hz) {
    throw InvalidArgument("clip rate " + std::to_string(clip.sample_rate_hz) +
                          " Hz does not match feature rate " +
                          std::to_string(config_.sample_rate_hz) + " Hz");
  }
  const std::size_t win = window_.size();
  const std::size_t hop = config_.hop_samples();
  const auto fft_n = static_cast<std::size_t>(config_.fft_size);
  const std::size_t bins = fft_n / 2 + 1;
  const auto m = static_cast<std::size_t>(config_.mel_bins);

  MelSpectrogram spec;
  spec.config = config_;
  spec.source_sample_rate_hz = clip.sample_rate_hz;
  spec.num_bins = m;
  spec.num_frames = frame_count(clip.samples.size(), win, hop);
  spec.frames.resize(spec.num_frames * m);

  const double log_floor = std::log(config_.log_floor);
  std::vector<double> magnitude(bins);
  for (std::size_t t = 0; t < spec.num_frames; ++t) {
    const double* frame = clip.samples.data() + t * hop;
    for (std::size_t n = 0; n < win; ++n) fft_->in[n] = frame[n] * window_[n];
    std::fill(fft_->in + win, fft_->in + fft_n, 0.0);
    fftw_execute(fft_->plan);
    for (std::size_t k = 0; k < bins; ++k) {
      magnitude[k] = std::hypot(fft_->out[k][0], fft_->out[k][1]);
    }
    for (std::size_t j = 0; j < m; ++j) {
      const double* w = filterbank_.data() + j * bins;
      double energy = 0.0;
      for (std::size_t k = 0; k < bins; ++k) energy += w[k] * magnitude[k];
      spec.frames[t * m + j] =
          energy > config_.log_floor ? std::log(energy) : log_floor;
    }
  }
  return spec;
}

MelSpectrogram log_mel(const AudioClip& clip, const FeatureConfig& config) {
  LogMelExtractor extractor(config);
  return extractor.compute(clip);
}

}  // namespace convasr::dsp
