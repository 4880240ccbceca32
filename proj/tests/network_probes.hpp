// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

// Whole-network checks shared by the unit and acceptance tests.

#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "autodiff/grad_check.hpp"
#include "ctc/ctc.hpp"
#include "model/network.hpp"

namespace convasr::testing {

inline std::vector<double> flatten_trainable(const model::NetworkParams& p) {
  std::vector<double> out;
  for_each_trainable(p, [&](const std::string&, const std::vector<double>& v) {
    out.insert(out.end(), v.begin(), v.end());
  });
  return out;
}

inline void load_trainable(model::NetworkParams& p, std::span<const double> x) {
  std::size_t k = 0;
  for_each_trainable(p, [&](const std::string&, std::vector<double>& v) {
    for (double& d : v) d = x[k++];
  });
}

// Max relative error of the train-mode network + CTC gradient against central
// differences, over every trainable scalar.
inline double network_grad_error(const model::NetworkConfig& config, std::uint64_t seed,
                                 std::size_t frames, const std::vector<int>& labels) {
  const auto base = model::NetworkParams::create(config, seed);
  std::mt19937_64 g(seed + 1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ad::Tensor2 features(static_cast<std::size_t>(config.mel_bins), frames);
  for (double& v : features.data) v = u(g);
  // Nonzero biases and affine parameters.
  auto start = base;
  for_each_trainable(start, [&](const std::string&, std::vector<double>& v) {
    for (double& d : v) d += 0.1 * u(g);
  });

  const ad::Objective f = [&](std::span<const double> x, std::span<double> grad) {
    auto params = start;  // fresh running statistics every evaluation
    load_trainable(params, x);
    model::ForwardCache cache;
    const auto logits = model::network_forward(features, params, ad::Mode::kTrain, &cache);
    const auto loss = ctc::ctc_loss(ctc::log_softmax(logits), labels);
    if (!grad.empty()) {
      auto grads = model::NetworkGrads::zeros(params);
      model::network_backward(params, cache, loss.grad_logits, grads);
      std::size_t k = 0;
      for_each_trainable(grads, [&](const std::string&, const std::vector<double>& v) {
        for (double d : v) grad[k++] = d;
      });
    }
    return loss.nll;
  };
  return ad::grad_check(f, flatten_trainable(start), {1e-5, 0, 0});
}

// Number of output frames whose infer-mode logits change when one input frame
// in the middle of a long random input is perturbed.
inline long perturbation_span(const model::NetworkConfig& config, std::uint64_t seed) {
  const auto params = model::NetworkParams::create(config, seed);
  const std::size_t frames = 400;
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ad::Tensor2 x(static_cast<std::size_t>(config.mel_bins), frames);
  for (double& v : x.data) v = u(g);
  const auto before = model::network_infer(x, params);
  const std::size_t probe = frames / 2;
  for (std::size_t m = 0; m < x.channels; ++m) x.at(m, probe) += 0.5;
  const auto after = model::network_infer(x, params);
  long changed = 0;
  for (std::size_t t = 0; t < frames; ++t) {
    bool differs = false;
    for (std::size_t a = 0; a < before.channels; ++a) differs |= before.at(a, t) != after.at(a, t);
    changed += differs ? 1 : 0;
  }
  return changed;
}

}  // namespace convasr::testing
