// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

namespace convasr::ad {

// Scalar objective over a flat parameter vector. Writes the analytic gradient
// into `grad` (same length as `x`) when `grad` is non-empty.
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct GradCheckOptions {
  double step = 1e-4;
  // Coordinates sampled without replacement; 0 checks every coordinate.
  std::size_t max_coords = 0;
  std::uint64_t seed = 0;
};

// Max over checked coordinates of |a - n| / max(1, |a|, |n|), where a is the
// analytic and n the central-difference derivative.
double grad_check(const Objective& f, std::span<const double> x,
                  const GradCheckOptions& options = {});

}  // namespace convasr::ad
