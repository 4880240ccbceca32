// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#include "dsp/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "common/error.hpp"

namespace convasr::dsp {

namespace {

std::uint32_t le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t le16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

// Linear interpolation at a fractional position, clamped to the last sample.
double sample_at(std::span<const double> x, double pos) {
  const std::size_t n = x.size();
  if (pos <= 0.0) return x[0];
  const auto i0 = static_cast<std::size_t>(pos);
  if (i0 + 1 >= n) return x[n - 1];
  const double frac = pos - static_cast<double>(i0);
  return x[i0] + frac * (x[i0 + 1] - x[i0]);
}

}  // namespace

void AudioClip::validate() const {
  if (sample_rate_hz <= 0) throw InvalidArgument("sample rate must be positive");
  for (double s : samples) {
    if (!std::isfinite(s)) throw InvalidArgument("audio contains a non-finite sample");
  }
}

AudioClip decode_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw WavFormatError("not a RIFF/WAVE file");
  }
  const std::uint8_t* fmt = nullptr;
  std::uint32_t fmt_size = 0;
  const std::uint8_t* data = nullptr;
  std::uint32_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    if (size > bytes.size() - body) {
      throw WavFormatError("chunk '" + std::string(reinterpret_cast<const char*>(chunk), 4) +
                           "' overruns the file");
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      fmt = bytes.data() + body;
      fmt_size = size;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = size;
    }
    // Chunks are word aligned.
    pos = body + size + (size & 1u);
  }
  if (fmt == nullptr) throw WavFormatError("missing fmt chunk");
  if (data == nullptr) throw WavFormatError("missing data chunk");
  if (fmt_size < 16) throw WavFormatError("fmt chunk too short");

  const std::uint16_t format_tag = le16(fmt);
  const std::uint16_t channels = le16(fmt + 2);
  const std::uint32_t rate = le32(fmt + 4);
  const std::uint16_t block_align = le16(fmt + 12);
  const std::uint16_t bits = le16(fmt + 14);

  if (format_tag != 1) {
    throw UnsupportedAudio("unsupported WAV codec (format tag " + std::to_string(format_tag) +
                           "); only PCM is decoded");
  }
  if (bits != 16) {
    throw UnsupportedAudio("unsupported bit depth " + std::to_string(bits) +
                           "; only 16-bit PCM is decoded");
  }
  if (channels != 1 && channels != 2) {
    throw UnsupportedAudio("unsupported channel count " + std::to_string(channels));
  }
  if (rate == 0 || rate > static_cast<std::uint32_t>(std::numeric_limits<int>::max())) {
    throw WavFormatError("invalid sample rate");
  }
  if (block_align != channels * 2) throw WavFormatError("block align inconsistent with format");

  AudioClip clip;
  clip.sample_rate_hz = static_cast<int>(rate);
  const std::size_t frames = data_size / block_align;
  clip.samples.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    const std::uint8_t* p = data + f * block_align;
    if (channels == 1) {
      clip.samples[f] = static_cast<std::int16_t>(le16(p)) / 32768.0;
    } else {
      const double l = static_cast<std::int16_t>(le16(p)) / 32768.0;
      const double r = static_cast<std::int16_t>(le16(p + 2)) / 32768.0;
      clip.samples[f] = 0.5 * (l + r);
    }
  }
  return clip;
}

AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes);
  } catch (const WavFormatError& e) {
    throw WavFormatError(path.string() + ": " + e.what());
  } catch (const UnsupportedAudio& e) {
    throw UnsupportedAudio(path.string() + ": " + e.what());
  }
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip) {
  const auto n = static_cast<std::uint32_t>(clip.samples.size());
  std::vector<std::uint8_t> out;
  out.reserve(44 + 2 * n);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put32(out, 36 + 2 * n);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put32(out, 16);
  put16(out, 1);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(clip.sample_rate_hz));
  put32(out, static_cast<std::uint32_t>(clip.sample_rate_hz) * 2);
  put16(out, 2);
  put16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put32(out, 2 * n);
  for (double s : clip.samples) {
    const double q = std::round(std::clamp(s, -1.0, 1.0) * 32768.0);
    put16(out, static_cast<std::uint16_t>(
                   static_cast<std::int16_t>(std::clamp(q, -32768.0, 32767.0))));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("short write to " + path.string());
}

AudioClip resample(const AudioClip& clip, int target_hz) {
  if (target_hz <= 0) throw InvalidArgument("target sample rate must be positive");
  clip.validate();
  if (clip.sample_rate_hz == target_hz) return clip;

  AudioClip out;
  out.sample_rate_hz = target_hz;
  const double ratio = static_cast<double>(clip.sample_rate_hz) / target_hz;
  const auto n_out = static_cast<std::size_t>(
      std::llround(static_cast<double>(clip.samples.size()) * target_hz / clip.sample_rate_hz));
  if (clip.samples.empty()) return out;
  out.samples.resize(n_out);
  for (std::size_t j = 0; j < n_out; ++j) {
    out.samples[j] = sample_at(clip.samples, static_cast<double>(j) * ratio);
  }
  return out;
}

double mean_power(std::span<const double> samples) {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (double s : samples) acc += s * s;
  return acc / static_cast<double>(samples.size());
}

AudioClip mix_noise(const AudioClip& clip, const AudioClip& noise, double snr_db, Rng& rng) {
  clip.validate();
  noise.validate();
  if (clip.sample_rate_hz != noise.sample_rate_hz) {
    throw InvalidArgument("noise sample rate " + std::to_string(noise.sample_rate_hz) +
                          " does not match clip rate " + std::to_string(clip.sample_rate_hz));
  }
  if (std::isnan(snr_db)) throw InvalidArgument("SNR is NaN");
  if (noise.samples.empty() || mean_power(noise.samples) == 0.0) {
    throw InvalidArgument("noise clip has zero power");
  }

  const std::size_t n = clip.samples.size();
  const std::size_t m = noise.samples.size();
  const std::size_t offset = static_cast<std::size_t>(rng.uniform_index(m));
  std::vector<double> segment(n);
  for (std::size_t i = 0; i < n; ++i) segment[i] = noise.samples[(offset + i) % m];

  AudioClip out = clip;
  if (snr_db == kNoNoise || n == 0) return out;

  const double p_signal = mean_power(clip.samples);
  double p_noise = mean_power(segment);
  // A short silent stretch of an otherwise audible noise file.
  if (p_noise == 0.0) p_noise = mean_power(noise.samples);
  const double gain = std::sqrt(p_signal / (p_noise * std::pow(10.0, snr_db / 10.0)));
  for (std::size_t i = 0; i < n; ++i) {
    out.samples[i] = std::clamp(clip.samples[i] + gain * segment[i], -1.0, 1.0);
  }
  return out;
}

AudioClip stretch(const AudioClip& clip, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw InvalidArgument("stretch factor must be positive and finite");
  }
  clip.validate();
  if (factor == 1.0) return clip;
  AudioClip out;
  out.sample_rate_hz = clip.sample_rate_hz;
  if (clip.samples.empty()) return out;
  const auto n_out =
      static_cast<std::size_t>(std::llround(static_cast<double>(clip.samples.size()) * factor));
  out.samples.resize(n_out);
  for (std::size_t j = 0; j < n_out; ++j) {
    out.samples[j] = sample_at(clip.samples, static_cast<double>(j) / factor);
  }
  return out;
}

AudioClip random_stretch(const AudioClip& clip, std::array<double, 2> factor_range, Rng& rng) {
  const auto [lo, hi] = factor_range;
  if (!(lo > 0.0)) throw InvalidArgument("stretch range lower bound must be positive");
  if (hi < lo) throw InvalidArgument("stretch range is empty");
  const double factor = lo == hi ? lo : rng.uniform(lo, hi);
  return stretch(clip, factor);
}

}  // namespace convasr::dsp
