// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#include "model/network.hpp"

#include <numeric>
#include <string>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace convasr::model {

namespace {

std::size_t sz(int v) { return static_cast<std::size_t>(v); }

ResidualBlockGrads zeros_like(const ResidualBlockParams& p) {
  return {p.filter_conv.zeros_like(), p.gate_conv.zeros_like(), p.residual_proj.zeros_like(),
          p.skip_proj.zeros_like()};
}

}  // namespace

void NetworkConfig::validate() const {
  if (num_stacks < 1) throw ConfigError("num_stacks must be >= 1");
  if (blocks_per_stack < 1) throw ConfigError("blocks_per_stack must be >= 1");
  if (static_cast<int>(dilations.size()) != blocks_per_stack) {
    throw ConfigError("dilations has " + std::to_string(dilations.size()) +
                      " entries but blocks_per_stack is " + std::to_string(blocks_per_stack));
  }
  for (int d : dilations) {
    if (d < 1) throw ConfigError("dilations must be >= 1");
  }
  if (kernel_size < 1) throw ConfigError("kernel_size must be >= 1");
  if (residual_channels < 1 || skip_channels < 1) throw ConfigError("channel widths must be >= 1");
  if (mel_bins < 1) throw ConfigError("mel_bins must be >= 1");
  if (alphabet_size < 2) throw ConfigError("alphabet_size must be >= 2 (blank plus one symbol)");
}

NetworkParams NetworkParams::create(const NetworkConfig& config, std::uint64_t seed) {
  config.validate();
  const std::size_t R = sz(config.residual_channels);
  const std::size_t S = sz(config.skip_channels);
  const std::size_t K = sz(config.kernel_size);
  Rng rng(seed);

  NetworkParams p;
  p.config = config;
  p.input_proj = Conv1dParams(R, sz(config.mel_bins), 1, 1);
  p.input_proj.init_uniform(rng);
  for (int s = 0; s < config.num_stacks; ++s) {
    for (int j = 0; j < config.blocks_per_stack; ++j) {
      const std::size_t d = sz(config.dilations[sz(j)]);
      ResidualBlockParams b{Conv1dParams(R, R, K, d), Conv1dParams(R, R, K, d),
                            Conv1dParams(R, R, 1, 1), Conv1dParams(S, R, 1, 1)};
      b.filter_conv.init_uniform(rng);
      b.gate_conv.init_uniform(rng);
      b.residual_proj.init_uniform(rng);
      b.skip_proj.init_uniform(rng);
      p.blocks.push_back(std::move(b));
    }
  }
  p.head_conv1 = Conv1dParams(S, S, 1, 1);
  p.head_conv1.init_uniform(rng);
  p.head_bn = ad::BatchNormParams(S);
  p.head_conv2 = Conv1dParams(sz(config.alphabet_size), S, 1, 1);
  p.head_conv2.init_uniform(rng);
  return p;
}

NetworkGrads NetworkGrads::zeros(const NetworkParams& params) {
  NetworkGrads g;
  g.blocks_per_stack = params.config.blocks_per_stack;
  g.input_proj = params.input_proj.zeros_like();
  for (const auto& b : params.blocks) g.blocks.push_back(zeros_like(b));
  g.head_conv1 = params.head_conv1.zeros_like();
  g.head_bn.gamma.assign(params.head_bn.channels(), 0.0);
  g.head_bn.beta.assign(params.head_bn.channels(), 0.0);
  g.head_conv2 = params.head_conv2.zeros_like();
  return g;
}

void NetworkGrads::set_zero() {
  for_each_trainable(*this, [](const std::string&, std::vector<double>& v) {
    std::fill(v.begin(), v.end(), 0.0);
  });
}

void NetworkGrads::scale(double s) {
  for_each_trainable(*this, [s](const std::string&, std::vector<double>& v) {
    for (double& x : v) x *= s;
  });
}

void NetworkGrads::add(const NetworkGrads& other) {
  std::vector<const std::vector<double>*> src;
  for_each_trainable(other, [&](const std::string&, const std::vector<double>& v) {
    src.push_back(&v);
  });
  std::size_t k = 0;
  for_each_trainable(*this, [&](const std::string& name, std::vector<double>& v) {
    if (k >= src.size() || src[k]->size() != v.size()) {
      throw ShapeError("gradient accumulation: shape mismatch at " + name);
    }
    const auto& o = *src[k++];
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += o[i];
  });
}

BlockOutput residual_block_forward(const Tensor2& x, const ResidualBlockParams& p,
                                   BlockCache* cache) {
  Tensor2 pre_f = ad::dilated_conv1d(x, p.filter_conv);
  Tensor2 pre_g = ad::dilated_conv1d(x, p.gate_conv);
  Tensor2 z = ad::gated_activation(pre_f, pre_g);
  BlockOutput out{ad::add(x, ad::conv1x1(z, p.residual_proj)), ad::conv1x1(z, p.skip_proj)};
  if (cache != nullptr) {
    cache->input = x;
    cache->pre_filter = std::move(pre_f);
    cache->pre_gate = std::move(pre_g);
    cache->gated = std::move(z);
  }
  return out;
}

Tensor2 residual_block_backward(const ResidualBlockParams& p, const BlockCache& cache,
                                const Tensor2& d_residual, const Tensor2& d_skip,
                                ResidualBlockGrads& grads) {
  Tensor2 dz = ad::conv1x1_backward(cache.gated, p.skip_proj, d_skip, grads.skip_proj);
  ad::add_inplace(dz, ad::conv1x1_backward(cache.gated, p.residual_proj, d_residual,
                                           grads.residual_proj));
  const auto g = ad::gated_activation_backward(cache.pre_filter, cache.pre_gate, dz);
  Tensor2 dx = d_residual;
  ad::add_inplace(dx, ad::dilated_conv1d_backward(cache.input, p.filter_conv, g.dxf,
                                                  grads.filter_conv));
  ad::add_inplace(dx, ad::dilated_conv1d_backward(cache.input, p.gate_conv, g.dxg,
                                                  grads.gate_conv));
  return dx;
}

StackOutput stack_forward(const Tensor2& x, std::span<const ResidualBlockParams> blocks,
                          std::span<const int> dilations, std::vector<BlockCache>* caches) {
  if (blocks.size() != dilations.size()) {
    throw InvalidArgument("stack expects " + std::to_string(dilations.size()) + " blocks, got " +
                          std::to_string(blocks.size()));
  }
  if (blocks.empty()) throw InvalidArgument("stack has no blocks");
  StackOutput out{x, Tensor2(blocks[0].skip_proj.out_channels, x.time)};
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    const auto& b = blocks[j];
    const auto d = static_cast<std::size_t>(dilations[j]);
    if (b.filter_conv.dilation != d || b.gate_conv.dilation != d) {
      throw InvalidArgument("block " + std::to_string(j) + " has dilation " +
                            std::to_string(b.filter_conv.dilation) + ", expected " +
                            std::to_string(d));
    }
    BlockCache* cache = nullptr;
    if (caches != nullptr) cache = &caches->emplace_back();
    BlockOutput bo = residual_block_forward(out.output, b, cache);
    out.output = std::move(bo.residual);
    ad::add_inplace(out.skip_sum, bo.skip);
  }
  return out;
}

Tensor2 features_from_mel(const dsp::MelSpectrogram& mel) {
  Tensor2 f(mel.num_bins, mel.num_frames);
  for (std::size_t t = 0; t < mel.num_frames; ++t) {
    for (std::size_t m = 0; m < mel.num_bins; ++m) f.at(m, t) = mel.at(t, m);
  }
  return f;
}

namespace {

// `bn_state` receives the running-statistics update in train mode.
Tensor2 forward_impl(const Tensor2& features, const NetworkParams& params, Mode mode,
                     ad::BatchNormParams* bn_state, ForwardCache* cache) {
  const auto& cfg = params.config;
  if (features.channels != sz(cfg.mel_bins)) {
    throw ShapeError("network expects " + std::to_string(cfg.mel_bins) + " mel bins, got " +
                     std::to_string(features.channels));
  }
  if (features.time == 0) throw InvalidArgument("network input has no frames");
  if (mode == Mode::kTrain && features.time < 2) {
    throw InvalidArgument("train mode needs at least 2 frames for batch normalization");
  }
  if (cache != nullptr) {
    cache->features = features;
    cache->blocks.clear();
    cache->bn = {};
  }

  Tensor2 h = ad::conv1x1(features, params.input_proj);
  if (cache != nullptr) cache->lifted = h;
  Tensor2 skip_total(sz(cfg.skip_channels), features.time);
  for (int s = 0; s < cfg.num_stacks; ++s) {
    StackOutput so = stack_forward(h, params.stack(s), cfg.dilations,
                                   cache != nullptr ? &cache->blocks : nullptr);
    h = std::move(so.output);
    ad::add_inplace(skip_total, so.skip_sum);
  }
  Tensor2 head_relu = ad::relu(skip_total);
  Tensor2 head1 = ad::conv1x1(head_relu, params.head_conv1);
  Tensor2 normed = mode == Mode::kTrain
                       ? ad::batch_norm(head1, *bn_state, Mode::kTrain,
                                        cache != nullptr ? &cache->bn : nullptr)
                       : ad::batch_norm_infer(head1, params.head_bn);
  Tensor2 logits = ad::conv1x1(normed, params.head_conv2);
  if (cache != nullptr) {
    cache->skip_total = std::move(skip_total);
    cache->head_relu = std::move(head_relu);
    cache->head1 = std::move(head1);
    cache->head_bn_out = std::move(normed);
  }
  return logits;
}

}  // namespace

Tensor2 network_forward(const Tensor2& features, NetworkParams& params, Mode mode,
                        ForwardCache* cache) {
  return forward_impl(features, params, mode, &params.head_bn, cache);
}

Tensor2 network_infer(const Tensor2& features, const NetworkParams& params) {
  return forward_impl(features, params, Mode::kInfer, nullptr, nullptr);
}

Tensor2 network_infer(const dsp::MelSpectrogram& mel, const NetworkParams& params) {
  return network_infer(features_from_mel(mel), params);
}

Tensor2 network_forward(const dsp::MelSpectrogram& mel, NetworkParams& params, Mode mode,
                        ForwardCache* cache) {
  return network_forward(features_from_mel(mel), params, mode, cache);
}

Tensor2 network_backward(const NetworkParams& params, const ForwardCache& cache,
                         const Tensor2& d_logits, NetworkGrads& grads) {
  const auto& cfg = params.config;
  if (cache.bn.inv_std.empty()) {
    throw InvalidArgument("network_backward needs a train-mode forward cache");
  }
  Tensor2 d = ad::conv1x1_backward(cache.head_bn_out, params.head_conv2, d_logits,
                                   grads.head_conv2);
  d = ad::batch_norm_backward(params.head_bn, cache.bn, d, grads.head_bn);
  d = ad::conv1x1_backward(cache.head_relu, params.head_conv1, d, grads.head_conv1);
  const Tensor2 d_skip = ad::relu_backward(cache.skip_total, d);

  // Every block's skip output feeds the global sum, so each receives d_skip.
  // The final residual output is unused.
  Tensor2 d_h(sz(cfg.residual_channels), d_logits.time);
  for (std::size_t b = params.blocks.size(); b-- > 0;) {
    d_h = residual_block_backward(params.blocks[b], cache.blocks[b], d_h, d_skip, grads.blocks[b]);
  }
  return ad::conv1x1_backward(cache.features, params.input_proj, d_h, grads.input_proj);
}

long receptive_field(const NetworkConfig& config) {
  const long sum = std::accumulate(config.dilations.begin(), config.dilations.end(), 0L);
  return 1 + static_cast<long>(config.num_stacks) * (config.kernel_size - 1) * sum;
}

long param_count(const NetworkConfig& config) {
  const long R = config.residual_channels;
  const long S = config.skip_channels;
  const long K = config.kernel_size;
  const long M = config.mel_bins;
  const long A = config.alphabet_size;
  const long per_block = 2 * (R * R * K + R) + (R * R + R) + (R * S + S);
  return (M * R + R) + static_cast<long>(config.num_stacks) * config.blocks_per_stack * per_block +
         (S * S + S) + 2 * S + (S * A + A);
}

}  // namespace convasr::model
