// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "autodiff/ops.hpp"
#include "autodiff/tensor.hpp"
#include "dsp/log_mel.hpp"

namespace convasr::model {

using ad::Conv1dParams;
using ad::Mode;
using ad::Tensor2;

struct NetworkConfig {
  int num_stacks = 7;
  int blocks_per_stack = 4;
  std::vector<int> dilations{1, 3, 9, 27};
  int kernel_size = 2;
  int residual_channels = 32;
  int skip_channels = 64;
  int mel_bins = 40;
  int alphabet_size = 2;

  // Throws ConfigError naming the violated invariant.
  void validate() const;
  bool operator==(const NetworkConfig&) const = default;
};

// One gated residual unit:
//   z        = tanh(filter_conv * x) . sigmoid(gate_conv * x)
//   residual = x + residual_proj(z)
//   skip     = skip_proj(z)
struct ResidualBlockParams {
  Conv1dParams filter_conv;
  Conv1dParams gate_conv;
  Conv1dParams residual_proj;
  Conv1dParams skip_proj;

  bool operator==(const ResidualBlockParams&) const = default;
};

struct ResidualBlockGrads {
  Conv1dParams filter_conv;
  Conv1dParams gate_conv;
  Conv1dParams residual_proj;
  Conv1dParams skip_proj;
};

struct NetworkParams {
  NetworkConfig config;
  Conv1dParams input_proj;
  // Stack-major: block j of stack s lives at s * blocks_per_stack + j.
  std::vector<ResidualBlockParams> blocks;
  Conv1dParams head_conv1;
  ad::BatchNormParams head_bn;
  Conv1dParams head_conv2;

  // Seeded fan-based init; biases and beta zero, gamma one.
  static NetworkParams create(const NetworkConfig& config, std::uint64_t seed);

  ResidualBlockParams& block(int stack, int index) {
    return blocks[static_cast<std::size_t>(stack * config.blocks_per_stack + index)];
  }
  std::span<const ResidualBlockParams> stack(int s) const {
    return std::span(blocks).subspan(static_cast<std::size_t>(s * config.blocks_per_stack),
                                     static_cast<std::size_t>(config.blocks_per_stack));
  }

  bool operator==(const NetworkParams&) const = default;
};

struct NetworkGrads {
  int blocks_per_stack = 1;
  Conv1dParams input_proj;
  std::vector<ResidualBlockGrads> blocks;
  Conv1dParams head_conv1;
  ad::BatchNormGrads head_bn;
  Conv1dParams head_conv2;

  static NetworkGrads zeros(const NetworkParams& params);
  void set_zero();
  void scale(double s);
  void add(const NetworkGrads& other);
};

inline std::size_t blocks_per_stack_of(const NetworkParams& p) {
  return static_cast<std::size_t>(p.config.blocks_per_stack);
}
inline std::size_t blocks_per_stack_of(const NetworkGrads& g) {
  return static_cast<std::size_t>(g.blocks_per_stack);
}

// Visits every learnable tensor as (name, values) in a fixed order. Works on
// NetworkParams and NetworkGrads alike, in matching order.
template <typename Net, typename Fn>
void for_each_trainable(Net& net, Fn&& fn) {
  auto conv = [&](const std::string& name, auto& c) {
    fn(name + ".weight", c.weight);
    fn(name + ".bias", c.bias);
  };
  conv("input_proj", net.input_proj);
  const std::size_t per_stack = blocks_per_stack_of(net);
  for (std::size_t b = 0; b < net.blocks.size(); ++b) {
    const std::string prefix =
        "stack" + std::to_string(b / per_stack) + ".block" + std::to_string(b % per_stack);
    conv(prefix + ".filter", net.blocks[b].filter_conv);
    conv(prefix + ".gate", net.blocks[b].gate_conv);
    conv(prefix + ".residual", net.blocks[b].residual_proj);
    conv(prefix + ".skip", net.blocks[b].skip_proj);
  }
  conv("head_conv1", net.head_conv1);
  fn(std::string("head_bn.gamma"), net.head_bn.gamma);
  fn(std::string("head_bn.beta"), net.head_bn.beta);
  conv("head_conv2", net.head_conv2);
}

// ---- residual block --------------------------------------------------------

struct BlockCache {
  Tensor2 input;
  Tensor2 pre_filter;
  Tensor2 pre_gate;
  Tensor2 gated;
};

struct BlockOutput {
  Tensor2 residual;
  Tensor2 skip;
};

BlockOutput residual_block_forward(const Tensor2& x, const ResidualBlockParams& p,
                                   BlockCache* cache = nullptr);

// Given upstream gradients for both outputs, accumulates parameter gradients
// and returns dL/dx.
Tensor2 residual_block_backward(const ResidualBlockParams& p, const BlockCache& cache,
                                const Tensor2& d_residual, const Tensor2& d_skip,
                                ResidualBlockGrads& grads);

// ---- stack ----------------------------------------------------------------

struct StackOutput {
  Tensor2 output;
  Tensor2 skip_sum;
};

// Threads the residual path through `blocks` in order and sums their skips.
// Throws InvalidArgument unless block j has dilation dilations[j] and the
// counts agree.
StackOutput stack_forward(const Tensor2& x, std::span<const ResidualBlockParams> blocks,
                          std::span<const int> dilations, std::vector<BlockCache>* caches = nullptr);

// ---- full network -----------------------------------------------------------

struct ForwardCache {
  Tensor2 features;  // M x T
  Tensor2 lifted;    // R x T, after input_proj
  std::vector<BlockCache> blocks;
  Tensor2 skip_total;
  Tensor2 head_relu;
  Tensor2 head1;
  ad::BatchNormCache bn;
  Tensor2 head_bn_out;
};

// Transposes a T x M spectrogram into an M-channel signal.
Tensor2 features_from_mel(const dsp::MelSpectrogram& mel);

// logits (A x T) = head_conv2(bn(head_conv1(relu(sum of all skips)))).
// Train mode updates the batch-norm running statistics in `params`.
// Throws ShapeError on a bin-count mismatch and InvalidArgument for T = 0 or
// (train mode) T < 2.
Tensor2 network_forward(const Tensor2& features, NetworkParams& params, Mode mode,
                        ForwardCache* cache = nullptr);
Tensor2 network_forward(const dsp::MelSpectrogram& mel, NetworkParams& params, Mode mode,
                        ForwardCache* cache = nullptr);

// Infer-mode forward; leaves the parameters untouched.
Tensor2 network_infer(const Tensor2& features, const NetworkParams& params);
Tensor2 network_infer(const dsp::MelSpectrogram& mel, const NetworkParams& params);

// Backward through a train-mode forward pass; accumulates into `grads` and
// returns dL/dfeatures.
Tensor2 network_backward(const NetworkParams& params, const ForwardCache& cache,
                         const Tensor2& d_logits, NetworkGrads& grads);

// 1 + num_stacks * (K - 1) * sum(dilations).
long receptive_field(const NetworkConfig& config);

// Number of learnable scalars (batch-norm running statistics excluded).
long param_count(const NetworkConfig& config);

}  // namespace convasr::model
