// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#include "autodiff/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "common/rng.hpp"

namespace convasr::ad {

double grad_check(const Objective& f, std::span<const double> x, const GradCheckOptions& options) {
  std::vector<double> point(x.begin(), x.end());
  std::vector<double> analytic(x.size(), 0.0);
  f(point, analytic);

  std::vector<std::size_t> coords(x.size());
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  if (options.max_coords != 0 && options.max_coords < coords.size()) {
    Rng rng(options.seed);
    shuffle(coords, rng);
    coords.resize(options.max_coords);
  }

  double worst = 0.0;
  std::span<double> no_grad;
  for (std::size_t c : coords) {
    const double saved = point[c];
    point[c] = saved + options.step;
    const double up = f(point, no_grad);
    point[c] = saved - options.step;
    const double down = f(point, no_grad);
    point[c] = saved;
    const double numeric = (up - down) / (2.0 * options.step);
    const double a = analytic[c];
    const double err = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace convasr::ad
