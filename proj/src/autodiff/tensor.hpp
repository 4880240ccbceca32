// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace convasr::ad {

// C x T activations, row-major by channel: element (c, t) at c * T + t.
struct Tensor2 {
  std::size_t channels = 0;
  std::size_t time = 0;
  std::vector<double> data;

  Tensor2() = default;
  Tensor2(std::size_t c, std::size_t t, double fill = 0.0) : channels(c), time(t), data(c * t, fill) {}

  double& at(std::size_t c, std::size_t t) { return data[c * time + t]; }
  double at(std::size_t c, std::size_t t) const { return data[c * time + t]; }

  std::span<double> row(std::size_t c) { return {data.data() + c * time, time}; }
  std::span<const double> row(std::size_t c) const { return {data.data() + c * time, time}; }

  bool same_shape(const Tensor2& o) const { return channels == o.channels && time == o.time; }
  bool operator==(const Tensor2&) const = default;
};

}  // namespace convasr::ad
