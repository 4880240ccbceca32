// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "autodiff/tensor.hpp"
#include "common/rng.hpp"

namespace convasr::ad {

// weight is O x I x K, flattened as (o * I + i) * K + k.
struct Conv1dParams {
  std::size_t out_channels = 0;
  std::size_t in_channels = 0;
  std::size_t kernel = 1;
  std::size_t dilation = 1;
  std::vector<double> weight;
  std::vector<double> bias;

  Conv1dParams() = default;
  Conv1dParams(std::size_t out, std::size_t in, std::size_t k, std::size_t d);

  double& w(std::size_t o, std::size_t i, std::size_t k) {
    return weight[(o * in_channels + i) * kernel + k];
  }
  double w(std::size_t o, std::size_t i, std::size_t k) const {
    return weight[(o * in_channels + i) * kernel + k];
  }

  // Zero tensors of the same shape (gradient buffers).
  Conv1dParams zeros_like() const;
  // Fan-based uniform init in +-sqrt(6 / (I*K + O*K)); bias zero.
  void init_uniform(Rng& rng);

  bool operator==(const Conv1dParams&) const = default;
};

struct BatchNormParams {
  std::vector<double> gamma;
  std::vector<double> beta;
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double momentum = 0.1;
  double eps = 1e-5;

  BatchNormParams() = default;
  explicit BatchNormParams(std::size_t channels);

  std::size_t channels() const { return gamma.size(); }
  bool operator==(const BatchNormParams&) const = default;
};

// Gradient of a BatchNormParams: only the affine parameters are learned.
struct BatchNormGrads {
  std::vector<double> gamma;
  std::vector<double> beta;
};

enum class Mode { kTrain, kInfer };

// ---- dilated convolution -------------------------------------------------
//
// Same-length output with symmetric zero padding of (K-1)*d samples in total,
// the odd sample on the right:
//   y[o, t] = bias[o] + sum_{i,k} weight[o,i,k] * x[i, t + k*d - left]
// with left = floor((K-1)*d / 2) and out-of-range x treated as zero.

Tensor2 dilated_conv1d(const Tensor2& x, const Conv1dParams& p);

// Returns dL/dx and accumulates dL/dweight, dL/dbias into `grads`.
Tensor2 dilated_conv1d_backward(const Tensor2& x, const Conv1dParams& p, const Tensor2& dy,
                                Conv1dParams& grads);

// K = 1, d = 1 specialization. Bitwise equal to dilated_conv1d.
Tensor2 conv1x1(const Tensor2& x, const Conv1dParams& p);
Tensor2 conv1x1_backward(const Tensor2& x, const Conv1dParams& p, const Tensor2& dy,
                         Conv1dParams& grads);

// ---- gated activation ----------------------------------------------------

double sigmoid(double v);

// z = tanh(xf) * sigmoid(xg), elementwise.
Tensor2 gated_activation(const Tensor2& xf, const Tensor2& xg);

struct GatedGrads {
  Tensor2 dxf;
  Tensor2 dxg;
};
GatedGrads gated_activation_backward(const Tensor2& xf, const Tensor2& xg, const Tensor2& dz);

// ---- batch normalization over the time axis ------------------------------

// Values saved by a train-mode forward pass for the backward pass.
struct BatchNormCache {
  Tensor2 normalized;             // x_hat
  std::vector<double> inv_std;    // per channel, 1 / sqrt(var + eps)
};

// Train mode normalizes each channel with its own mean and biased variance
// over time, then updates the running statistics (unbiased variance) with
// `momentum`. Infer mode uses the running statistics and leaves p untouched.
// Throws ShapeError on channel mismatch and InvalidArgument when train mode
// sees fewer than two frames.
Tensor2 batch_norm(const Tensor2& x, BatchNormParams& p, Mode mode,
                   BatchNormCache* cache = nullptr);

// Infer-mode normalization with the running statistics.
Tensor2 batch_norm_infer(const Tensor2& x, const BatchNormParams& p);

// Train-mode backward; accumulates into `grads`.
Tensor2 batch_norm_backward(const BatchNormParams& p, const BatchNormCache& cache,
                            const Tensor2& dy, BatchNormGrads& grads);

// ---- elementwise ----------------------------------------------------------

Tensor2 relu(const Tensor2& x);
// Subgradient 0 at exactly 0.
Tensor2 relu_backward(const Tensor2& x, const Tensor2& dy);

Tensor2 add(const Tensor2& a, const Tensor2& b);
void add_inplace(Tensor2& acc, const Tensor2& b);

Tensor2 scale(const Tensor2& x, double s);
Tensor2 scale_backward(const Tensor2& dy, double s);

}  // namespace convasr::ad
