// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "model/network.hpp"

namespace convasr::train {

struct AdamState {
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // One moment buffer per trainable tensor, in for_each_trainable order.
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  static AdamState for_params(const model::NetworkParams& params);
  bool operator==(const AdamState&) const = default;
};

// Bias-corrected Adam update of one tensor at 1-based step `t`.
void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, long t, double lr, double beta1, double beta2, double eps);

// Advances state.step and updates every trainable tensor. Throws ShapeError
// when the gradient or state layout does not match the parameters.
void adam_step(model::NetworkParams& params, const model::NetworkGrads& grads, AdamState& state,
               double lr);

}  // namespace convasr::train
