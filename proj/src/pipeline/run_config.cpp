// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#include "pipeline/run_config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "common/error.hpp"
#include "json.hpp"
#include "translit/translit.hpp"

namespace convasr::pipeline {

namespace {

using nlohmann::json;

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

void read_range(const json& obj, const char* key, std::array<double, 2>& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() != 2) {
    throw ConfigError(std::string("config key '") + key + "' must be a [lo, hi] pair");
  }
  try {
    out = v.get<std::array<double, 2>>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

const json& section(const json& root, const char* name) {
  static const json empty = json::object();
  if (!root.contains(name)) return empty;
  const json& s = root.at(name);
  if (!s.is_object()) throw ConfigError(std::string("config section '") + name + "' must be an object");
  return s;
}

void allow_keys(const json& obj, const char* where, std::initializer_list<const char*> keys) {
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
      throw ConfigError(std::string("unknown config key '") + key + "' in " + where);
    }
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

RunConfig RunConfig::parse(std::string_view json_text, const fs::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be a JSON object");

  allow_keys(root, "the top level", {"features", "network", "training", "data", "output_dir"});
  RunConfig c;
  const json& f = section(root, "features");
  allow_keys(f, "features", {"sample_rate_hz", "frame_len_ms", "frame_hop_ms", "mel_bins",
                             "fft_size", "fmin_hz", "fmax_hz", "log_floor"});
  read(f, "sample_rate_hz", c.features.sample_rate_hz);
  read(f, "frame_len_ms", c.features.frame_len_ms);
  read(f, "frame_hop_ms", c.features.frame_hop_ms);
  read(f, "mel_bins", c.features.mel_bins);
  read(f, "fft_size", c.features.fft_size);
  read(f, "fmin_hz", c.features.fmin_hz);
  read(f, "fmax_hz", c.features.fmax_hz);
  read(f, "log_floor", c.features.log_floor);

  const json& n = section(root, "network");
  allow_keys(n, "network", {"num_stacks", "blocks_per_stack", "dilations", "kernel_size",
                            "residual_channels", "skip_channels", "mel_bins"});
  read(n, "num_stacks", c.network.num_stacks);
  read(n, "blocks_per_stack", c.network.blocks_per_stack);
  read(n, "dilations", c.network.dilations);
  read(n, "kernel_size", c.network.kernel_size);
  read(n, "residual_channels", c.network.residual_channels);
  read(n, "skip_channels", c.network.skip_channels);
  c.network.mel_bins = c.features.mel_bins;
  if (n.contains("mel_bins")) {
    int m = 0;
    read(n, "mel_bins", m);
    if (m != c.features.mel_bins) throw ConfigError("network.mel_bins must equal features.mel_bins");
  }

  const json& t = section(root, "training");
  allow_keys(t, "training", {"learning_rate", "max_steps", "batch_size", "seed", "eval_every",
                             "checkpoint_every", "augment"});
  read(t, "learning_rate", c.training.learning_rate);
  read(t, "max_steps", c.training.max_steps);
  read(t, "batch_size", c.training.batch_size);
  read(t, "seed", c.training.seed);
  read(t, "eval_every", c.training.eval_every);
  read(t, "checkpoint_every", c.training.checkpoint_every);
  const json& a = section(t, "augment");
  allow_keys(a, "training.augment", {"noise", "stretch", "snr_db", "stretch_range"});
  read(a, "noise", c.training.augment.noise);
  read(a, "stretch", c.training.augment.stretch);
  read_range(a, "snr_db", c.training.augment.snr_db);
  read_range(a, "stretch_range", c.training.augment.stretch_range);

  const json& d = section(root, "data");
  allow_keys(d, "data", {"translit_table", "audio_root", "noise_dir", "split_seed", "manifests"});
  std::string table = (fs::path(CONVASR_DATA_DIR) / "buckwalter.tsv").string();
  read(d, "translit_table", table);
  c.translit_table = resolve(base_dir, table);
  std::string audio_root = ".";
  read(d, "audio_root", audio_root);
  c.audio_root = resolve(base_dir, audio_root);
  if (d.contains("noise_dir") && !d.at("noise_dir").is_null()) {
    std::string noise;
    read(d, "noise_dir", noise);
    c.noise_dir = resolve(base_dir, noise);
  }
  read(d, "split_seed", c.split_seed);
  if (!d.contains("manifests") || !d.at("manifests").is_array() || d.at("manifests").empty()) {
    throw ConfigError("data.manifests must be a non-empty array");
  }
  for (const json& m : d.at("manifests")) {
    ManifestSpec spec;
    if (m.is_string()) {
      spec.path = resolve(base_dir, m.get<std::string>());
    } else if (m.is_object()) {
      allow_keys(m, "data.manifests", {"path", "train_fraction"});
      std::string p;
      read(m, "path", p);
      if (p.empty()) throw ConfigError("manifest entry needs a path");
      spec.path = resolve(base_dir, p);
      read(m, "train_fraction", spec.train_fraction);
    } else {
      throw ConfigError("manifest entries must be paths or {path, train_fraction} objects");
    }
    c.manifests.push_back(std::move(spec));
  }

  std::string out = "output";
  read(root, "output_dir", out);
  c.output_dir = resolve(base_dir, out);
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  RunConfig c = parse(buf.str(), fs::absolute(path).parent_path());
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') {
    c.output_dir = fs::absolute(env);
  }
  c.validate();
  return c;
}

void RunConfig::validate() const {
  try {
    features.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("features: ") + e.what());
  }
  training.validate();
  model::NetworkConfig net = network;
  net.alphabet_size = std::max(net.alphabet_size, 2);
  net.validate();
  if (!fs::is_regular_file(translit_table)) {
    throw ConfigError("transliteration table not found: " + translit_table.string());
  }
  if (!fs::is_directory(audio_root)) throw ConfigError("audio_root not found: " + audio_root.string());
  if (noise_dir && !fs::is_directory(*noise_dir)) {
    throw ConfigError("noise_dir not found: " + noise_dir->string());
  }
  for (const auto& m : manifests) {
    if (!fs::is_regular_file(m.path)) throw ConfigError("manifest not found: " + m.path.string());
    if (!(m.train_fraction > 0.0 && m.train_fraction <= 1.0)) {
      throw ConfigError("train_fraction must lie in (0, 1] for " + m.path.string());
    }
  }
  if (static_cast<double>(split_seed) >= 9007199254740992.0) {
    throw ConfigError("split_seed must be below 2^53");
  }
}

std::string RunConfig::to_json() const {
  json manifests_json = json::array();
  for (const auto& m : manifests) {
    manifests_json.push_back({{"path", m.path.string()}, {"train_fraction", m.train_fraction}});
  }
  json root = {
      {"features",
       {{"sample_rate_hz", features.sample_rate_hz},
        {"frame_len_ms", features.frame_len_ms},
        {"frame_hop_ms", features.frame_hop_ms},
        {"mel_bins", features.mel_bins},
        {"fft_size", features.fft_size},
        {"fmin_hz", features.fmin_hz},
        {"fmax_hz", features.fmax_hz},
        {"log_floor", features.log_floor}}},
      {"network",
       {{"num_stacks", network.num_stacks},
        {"blocks_per_stack", network.blocks_per_stack},
        {"dilations", network.dilations},
        {"kernel_size", network.kernel_size},
        {"residual_channels", network.residual_channels},
        {"skip_channels", network.skip_channels}}},
      {"training",
       {{"learning_rate", training.learning_rate},
        {"max_steps", training.max_steps},
        {"batch_size", training.batch_size},
        {"seed", training.seed},
        {"eval_every", training.eval_every},
        {"checkpoint_every", training.checkpoint_every},
        {"augment",
         {{"noise", training.augment.noise},
          {"stretch", training.augment.stretch},
          {"snr_db", training.augment.snr_db},
          {"stretch_range", training.augment.stretch_range}}}}},
      {"data",
       {{"translit_table", translit_table.string()},
        {"audio_root", audio_root.string()},
        {"noise_dir", noise_dir ? json(noise_dir->string()) : json(nullptr)},
        {"split_seed", split_seed},
        {"manifests", manifests_json}}},
      {"output_dir", output_dir.string()},
  };
  return root.dump(2);
}

}  // namespace convasr::pipeline
