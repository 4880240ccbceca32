// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "autodiff/tensor.hpp"

namespace convasr::ctc {

using ad::Tensor2;

inline constexpr int kBlank = 0;

struct CtcResult {
  double nll = 0.0;    // -log p(labels | x), nats
  Tensor2 grad_logits;  // d nll / d logits, A x T
};

// Per-column log-softmax with max subtraction.
Tensor2 log_softmax(const Tensor2& logits);

// Frames needed to emit `labels`: L plus one separating blank per adjacent
// repeated pair.
std::size_t min_frames(std::span<const int> labels);

// Connectionist temporal classification loss by log-space forward-backward
// over the blank-extended label sequence (length 2L + 1).
//
// `log_probs` must be log_softmax(logits); the returned gradient is taken
// with respect to those logits: softmax minus the per-symbol state posterior.
// Throws InfeasibleLabel when T < min_frames(labels) and InvalidArgument for
// blank or out-of-range label ids.
CtcResult ctc_loss(const Tensor2& log_probs, std::span<const int> labels);

// Frame argmax (lowest index wins ties), collapse repeats, drop blanks.
std::vector<int> greedy_decode(const Tensor2& log_probs);

}  // namespace convasr::ctc
