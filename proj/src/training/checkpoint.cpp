// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#include "training/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

#include "common/error.hpp"

namespace convasr::train {

namespace {

constexpr char kMagic[8] = {'C', 'V', 'A', 'S', 'R', 'C', 'K', 'P'};
constexpr double kMaxExactInteger = 9007199254740992.0;  // 2^53

std::uint64_t fnv1a(const std::uint8_t* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + n);
  }
  std::vector<std::uint8_t> out;

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
};

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(get(8)); }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return size_ - pos_; }

 private:
  void need(std::size_t n) const {
    if (n > size_ - pos_) throw CorruptCheckpoint("checkpoint truncated");
  }
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

void add_scalar(std::vector<Record>& r, std::string name, double v) {
  r.push_back({std::move(name), {}, {v}});
}

void add_vector(std::vector<Record>& r, std::string name, std::vector<double> v) {
  const auto n = static_cast<std::uint64_t>(v.size());
  r.push_back({std::move(name), {n}, std::move(v)});
}

std::map<std::string, std::vector<std::uint64_t>> trainable_shapes(const model::NetworkParams& p) {
  std::map<std::string, std::vector<std::uint64_t>> shapes;
  auto conv = [&](const std::string& name, const ad::Conv1dParams& c) {
    shapes[name + ".weight"] = {c.out_channels, c.in_channels, c.kernel};
    shapes[name + ".bias"] = {c.out_channels};
  };
  conv("input_proj", p.input_proj);
  const auto per_stack = static_cast<std::size_t>(p.config.blocks_per_stack);
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    const std::string prefix =
        "stack" + std::to_string(b / per_stack) + ".block" + std::to_string(b % per_stack);
    conv(prefix + ".filter", p.blocks[b].filter_conv);
    conv(prefix + ".gate", p.blocks[b].gate_conv);
    conv(prefix + ".residual", p.blocks[b].residual_proj);
    conv(prefix + ".skip", p.blocks[b].skip_proj);
  }
  conv("head_conv1", p.head_conv1);
  shapes["head_bn.gamma"] = {p.head_bn.channels()};
  shapes["head_bn.beta"] = {p.head_bn.channels()};
  conv("head_conv2", p.head_conv2);
  return shapes;
}

std::vector<Record> to_records(const Checkpoint& c) {
  std::vector<Record> r;
  const auto& net = c.params.config;
  add_scalar(r, "network.num_stacks", net.num_stacks);
  add_scalar(r, "network.blocks_per_stack", net.blocks_per_stack);
  add_vector(r, "network.dilations", {net.dilations.begin(), net.dilations.end()});
  add_scalar(r, "network.kernel_size", net.kernel_size);
  add_scalar(r, "network.residual_channels", net.residual_channels);
  add_scalar(r, "network.skip_channels", net.skip_channels);
  add_scalar(r, "network.mel_bins", net.mel_bins);
  add_scalar(r, "network.alphabet_size", net.alphabet_size);

  const auto& f = c.features;
  add_scalar(r, "features.sample_rate_hz", f.sample_rate_hz);
  add_scalar(r, "features.frame_len_ms", f.frame_len_ms);
  add_scalar(r, "features.frame_hop_ms", f.frame_hop_ms);
  add_scalar(r, "features.mel_bins", f.mel_bins);
  add_scalar(r, "features.fft_size", f.fft_size);
  add_scalar(r, "features.fmin_hz", f.fmin_hz);
  add_scalar(r, "features.fmax_hz", f.fmax_hz);
  add_scalar(r, "features.log_floor", f.log_floor);

  std::vector<double> symbols;
  for (char s : c.alphabet) symbols.push_back(static_cast<unsigned char>(s));
  add_vector(r, "alphabet.symbols", std::move(symbols));
  std::vector<double> arabic;
  std::vector<double> roman;
  for (const auto& [cp, ch] : c.translit_pairs) {
    arabic.push_back(static_cast<double>(cp));
    roman.push_back(static_cast<unsigned char>(ch));
  }
  add_vector(r, "translit.arabic", std::move(arabic));
  add_vector(r, "translit.roman", std::move(roman));

  const auto shapes = trainable_shapes(c.params);
  std::vector<std::string> names;
  model::for_each_trainable(c.params, [&](const std::string& name, const std::vector<double>& t) {
    r.push_back({"param." + name, shapes.at(name), t});
    names.push_back(name);
  });
  add_vector(r, "buffer.head_bn.running_mean", c.params.head_bn.running_mean);
  add_vector(r, "buffer.head_bn.running_var", c.params.head_bn.running_var);
  add_scalar(r, "buffer.head_bn.momentum", c.params.head_bn.momentum);
  add_scalar(r, "buffer.head_bn.eps", c.params.head_bn.eps);

  add_scalar(r, "adam.step", static_cast<double>(c.optimizer.step));
  add_scalar(r, "adam.beta1", c.optimizer.beta1);
  add_scalar(r, "adam.beta2", c.optimizer.beta2);
  add_scalar(r, "adam.eps", c.optimizer.eps);
  if (c.optimizer.m.size() != names.size() || c.optimizer.v.size() != names.size()) {
    throw ShapeError("optimizer state does not match the parameter layout");
  }
  for (std::size_t k = 0; k < names.size(); ++k) {
    r.push_back({"adam.m." + names[k], shapes.at(names[k]), c.optimizer.m[k]});
    r.push_back({"adam.v." + names[k], shapes.at(names[k]), c.optimizer.v[k]});
  }

  add_scalar(r, "train.step", static_cast<double>(c.step));
  add_scalar(r, "train.seed", static_cast<double>(c.seed));
  return r;
}

class RecordTable {
 public:
  explicit RecordTable(std::vector<Record> records) {
    for (auto& rec : records) {
      std::string name = rec.name;
      if (!by_name_.emplace(std::move(name), std::move(rec)).second) {
        throw CorruptCheckpoint("duplicate record");
      }
    }
  }

  const Record& get(const std::string& name) const {
    const auto it = by_name_.find(name);
    if (it == by_name_.end()) throw CorruptCheckpoint("missing record '" + name + "'");
    return it->second;
  }

  double scalar(const std::string& name) const {
    const Record& r = get(name);
    if (!r.shape.empty() || r.data.size() != 1) {
      throw CorruptCheckpoint("record '" + name + "' is not a scalar");
    }
    return r.data[0];
  }

  long integer(const std::string& name) const {
    const double v = scalar(name);
    if (!std::isfinite(v) || v != std::floor(v) || std::abs(v) >= kMaxExactInteger) {
      throw CorruptCheckpoint("record '" + name + "' is not an integer");
    }
    return static_cast<long>(v);
  }

  const std::vector<double>& vector(const std::string& name) const {
    const Record& r = get(name);
    if (r.shape.size() != 1) throw CorruptCheckpoint("record '" + name + "' is not a vector");
    return r.data;
  }

  void tensor_into(const std::string& name, const std::vector<std::uint64_t>& shape,
                   std::vector<double>& out) const {
    const Record& r = get(name);
    if (r.shape != shape || r.data.size() != out.size()) {
      throw CorruptCheckpoint("record '" + name + "' has an unexpected shape");
    }
    out = r.data;
  }

 private:
  std::map<std::string, Record> by_name_;
};

int to_int(long v, const char* what) {
  if (v < INT32_MIN || v > INT32_MAX) throw CorruptCheckpoint(std::string(what) + " out of range");
  return static_cast<int>(v);
}

char to_ascii(double v) {
  if (v < 1 || v > 127 || v != std::floor(v)) throw CorruptCheckpoint("symbol out of range");
  return static_cast<char>(static_cast<int>(v));
}

Checkpoint from_records(std::vector<Record> records, std::uint32_t version) {
  const RecordTable t(std::move(records));
  Checkpoint c;
  c.format_version = version;

  model::NetworkConfig net;
  net.num_stacks = to_int(t.integer("network.num_stacks"), "num_stacks");
  net.blocks_per_stack = to_int(t.integer("network.blocks_per_stack"), "blocks_per_stack");
  net.dilations.clear();
  for (double d : t.vector("network.dilations")) net.dilations.push_back(static_cast<int>(d));
  net.kernel_size = to_int(t.integer("network.kernel_size"), "kernel_size");
  net.residual_channels = to_int(t.integer("network.residual_channels"), "residual_channels");
  net.skip_channels = to_int(t.integer("network.skip_channels"), "skip_channels");
  net.mel_bins = to_int(t.integer("network.mel_bins"), "mel_bins");
  net.alphabet_size = to_int(t.integer("network.alphabet_size"), "alphabet_size");
  try {
    net.validate();
  } catch (const ConfigError& e) {
    throw CorruptCheckpoint(std::string("invalid network configuration: ") + e.what());
  }

  auto& f = c.features;
  f.sample_rate_hz = to_int(t.integer("features.sample_rate_hz"), "sample_rate_hz");
  f.frame_len_ms = t.scalar("features.frame_len_ms");
  f.frame_hop_ms = t.scalar("features.frame_hop_ms");
  f.mel_bins = to_int(t.integer("features.mel_bins"), "mel_bins");
  f.fft_size = to_int(t.integer("features.fft_size"), "fft_size");
  f.fmin_hz = t.scalar("features.fmin_hz");
  f.fmax_hz = t.scalar("features.fmax_hz");
  f.log_floor = t.scalar("features.log_floor");

  for (double s : t.vector("alphabet.symbols")) c.alphabet.push_back(to_ascii(s));
  const auto& arabic = t.vector("translit.arabic");
  const auto& roman = t.vector("translit.roman");
  if (arabic.size() != roman.size()) throw CorruptCheckpoint("translit table sides differ");
  for (std::size_t i = 0; i < arabic.size(); ++i) {
    if (arabic[i] < 0 || arabic[i] > 0x10FFFF) throw CorruptCheckpoint("codepoint out of range");
    c.translit_pairs.emplace_back(static_cast<char32_t>(arabic[i]), to_ascii(roman[i]));
  }

  // Shapes come from a freshly built parameter set; values from the file.
  c.params = model::NetworkParams::create(net, 0);
  const auto shapes = trainable_shapes(c.params);
  std::vector<std::string> names;
  model::for_each_trainable(c.params, [&](const std::string& name, std::vector<double>& v) {
    t.tensor_into("param." + name, shapes.at(name), v);
    names.push_back(name);
  });
  const auto S = static_cast<std::uint64_t>(net.skip_channels);
  t.tensor_into("buffer.head_bn.running_mean", {S}, c.params.head_bn.running_mean);
  t.tensor_into("buffer.head_bn.running_var", {S}, c.params.head_bn.running_var);
  c.params.head_bn.momentum = t.scalar("buffer.head_bn.momentum");
  c.params.head_bn.eps = t.scalar("buffer.head_bn.eps");

  c.optimizer = AdamState::for_params(c.params);
  c.optimizer.step = t.integer("adam.step");
  c.optimizer.beta1 = t.scalar("adam.beta1");
  c.optimizer.beta2 = t.scalar("adam.beta2");
  c.optimizer.eps = t.scalar("adam.eps");
  for (std::size_t k = 0; k < names.size(); ++k) {
    t.tensor_into("adam.m." + names[k], shapes.at(names[k]), c.optimizer.m[k]);
    t.tensor_into("adam.v." + names[k], shapes.at(names[k]), c.optimizer.v[k]);
  }

  c.step = t.integer("train.step");
  const long seed = t.integer("train.seed");
  if (seed < 0) throw CorruptCheckpoint("negative seed");
  c.seed = static_cast<std::uint64_t>(seed);
  return c;
}

}  // namespace

std::vector<std::uint8_t> serialize(const Checkpoint& c) {
  if (static_cast<double>(c.seed) >= kMaxExactInteger) {
    throw InvalidArgument("seed must be below 2^53 to be stored exactly");
  }
  const auto records = to_records(c);
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(c.format_version);
  w.u32(static_cast<std::uint32_t>(records.size()));
  for (const auto& r : records) {
    w.u32(static_cast<std::uint32_t>(r.name.size()));
    w.bytes(r.name.data(), r.name.size());
    w.u32(static_cast<std::uint32_t>(r.shape.size()));
    for (auto d : r.shape) w.u64(d);
    for (double v : r.data) w.f64(v);
  }
  w.u64(fnv1a(w.out.data(), w.out.size()));
  return std::move(w.out);
}

Checkpoint deserialize(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < sizeof kMagic + 16 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw CorruptCheckpoint("not a checkpoint (bad magic or too short)");
  }
  const std::size_t body = bytes.size() - 8;
  Reader trailer(bytes.data() + body, 8);
  if (trailer.u64() != fnv1a(bytes.data(), body)) {
    throw CorruptCheckpoint("checkpoint checksum mismatch (truncated or corrupted)");
  }

  Reader in(bytes.data() + sizeof kMagic, body - sizeof kMagic);
  const std::uint32_t version = in.u32();
  if (version != kCheckpointVersion) {
    throw VersionMismatch("checkpoint format version " + std::to_string(version) +
                          " is not supported (expected " + std::to_string(kCheckpointVersion) +
                          ")");
  }
  const std::uint32_t count = in.u32();
  std::vector<Record> records;
  for (std::uint32_t i = 0; i < count; ++i) {
    Record r;
    r.name = in.str(in.u32());
    const std::uint32_t rank = in.u32();
    if (rank > 8) throw CorruptCheckpoint("record rank too large");
    std::uint64_t n = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      const std::uint64_t d = in.u64();
      if (d != 0 && n > in.remaining() / d) throw CorruptCheckpoint("record size overflows file");
      n *= d;
      r.shape.push_back(d);
    }
    if (n > in.remaining() / 8) throw CorruptCheckpoint("record payload overruns file");
    r.data.resize(n);
    for (auto& v : r.data) v = in.f64();
    records.push_back(std::move(r));
  }
  if (in.remaining() != 0) throw CorruptCheckpoint("trailing bytes after the last record");
  return from_records(std::move(records), version);
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  const auto bytes = serialize(c);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place: " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace convasr::train
