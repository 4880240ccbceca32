// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#include "training/adam.hpp"

#include <cmath>
#include <string>

#include "common/error.hpp"

namespace convasr::train {

AdamState AdamState::for_params(const model::NetworkParams& params) {
  AdamState s;
  model::for_each_trainable(params, [&](const std::string&, const std::vector<double>& t) {
    s.m.emplace_back(t.size(), 0.0);
    s.v.emplace_back(t.size(), 0.0);
  });
  return s;
}

void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, long t, double lr, double beta1, double beta2, double eps) {
  if (grad.size() != param.size() || m.size() != param.size() || v.size() != param.size()) {
    throw ShapeError("adam: tensor size mismatch");
  }
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    m[i] = beta1 * m[i] + (1.0 - beta1) * g;
    v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    param[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

void adam_step(model::NetworkParams& params, const model::NetworkGrads& grads, AdamState& state,
               double lr) {
  if (!(lr > 0.0)) throw InvalidArgument("learning rate must be positive");
  std::vector<const std::vector<double>*> g;
  model::for_each_trainable(grads, [&](const std::string&, const std::vector<double>& t) {
    g.push_back(&t);
  });
  if (g.size() != state.m.size() || g.size() != state.v.size()) {
    throw ShapeError("adam: state does not match the parameter layout");
  }
  std::vector<std::vector<double>*> p;
  std::size_t k = 0;
  model::for_each_trainable(params, [&](const std::string& name, std::vector<double>& t) {
    if (k >= g.size() || g[k]->size() != t.size() || state.m[k].size() != t.size() ||
        state.v[k].size() != t.size()) {
      throw ShapeError("adam: shape mismatch at " + name);
    }
    p.push_back(&t);
    ++k;
  });
  if (p.size() != g.size()) throw ShapeError("adam: gradient has extra tensors");

  const long t = state.step + 1;
  for (k = 0; k < p.size(); ++k) {
    adam_update(*p[k], *g[k], state.m[k], state.v[k], t, lr, state.beta1, state.beta2, state.eps);
  }
  state.step = t;
}

}  // namespace convasr::train
