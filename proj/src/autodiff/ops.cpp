// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#include "autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "common/error.hpp"

namespace convasr::ad {

namespace {

std::string shape_str(const Tensor2& t) {
  return std::to_string(t.channels) + "x" + std::to_string(t.time);
}

void require_same_shape(const Tensor2& a, const Tensor2& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
  }
}

// Valid output range [lo, hi) for tap offset `shift` over length T.
struct Range {
  std::size_t lo, hi;
};
Range tap_range(std::ptrdiff_t shift, std::size_t T) {
  const auto t = static_cast<std::ptrdiff_t>(T);
  const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -shift);
  const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(t, t - shift);
  if (hi <= lo) return {0, 0};
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

std::ptrdiff_t left_pad(const Conv1dParams& p) {
  return static_cast<std::ptrdiff_t>((p.kernel - 1) * p.dilation / 2);
}

void check_conv(const Tensor2& x, const Conv1dParams& p) {
  if (x.channels != p.in_channels) {
    throw ShapeError("conv1d: input has " + std::to_string(x.channels) +
                     " channels, weights expect " + std::to_string(p.in_channels));
  }
}

Tensor2 conv_forward(const Tensor2& x, const Conv1dParams& p) {
  const std::size_t T = x.time;
  Tensor2 y(p.out_channels, T);
  const std::ptrdiff_t left = left_pad(p);
  for (std::size_t o = 0; o < p.out_channels; ++o) {
    double* yr = y.data.data() + o * T;
    std::fill(yr, yr + T, p.bias[o]);
    for (std::size_t i = 0; i < p.in_channels; ++i) {
      const double* xr = x.data.data() + i * T;
      for (std::size_t k = 0; k < p.kernel; ++k) {
        const double wv = p.w(o, i, k);
        const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(k * p.dilation) - left;
        const auto [lo, hi] = tap_range(shift, T);
        for (std::size_t t = lo; t < hi; ++t) yr[t] += wv * xr[t + shift];
      }
    }
  }
  return y;
}

Tensor2 conv_backward(const Tensor2& x, const Conv1dParams& p, const Tensor2& dy,
                      Conv1dParams& grads) {
  const std::size_t T = x.time;
  if (dy.channels != p.out_channels || dy.time != T) {
    throw ShapeError("conv1d backward: upstream gradient has shape " + shape_str(dy));
  }
  if (grads.weight.size() != p.weight.size() || grads.bias.size() != p.bias.size()) {
    throw ShapeError("conv1d backward: gradient buffer shape mismatch");
  }
  Tensor2 dx(x.channels, T);
  const std::ptrdiff_t left = left_pad(p);
  for (std::size_t o = 0; o < p.out_channels; ++o) {
    const double* dyr = dy.data.data() + o * T;
    double db = 0.0;
    for (std::size_t t = 0; t < T; ++t) db += dyr[t];
    grads.bias[o] += db;
    for (std::size_t i = 0; i < p.in_channels; ++i) {
      const double* xr = x.data.data() + i * T;
      double* dxr = dx.data.data() + i * T;
      for (std::size_t k = 0; k < p.kernel; ++k) {
        const double wv = p.w(o, i, k);
        const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(k * p.dilation) - left;
        const auto [lo, hi] = tap_range(shift, T);
        double dw = 0.0;
        for (std::size_t t = lo; t < hi; ++t) {
          dw += dyr[t] * xr[t + shift];
          dxr[t + shift] += wv * dyr[t];
        }
        grads.w(o, i, k) += dw;
      }
    }
  }
  return dx;
}

}  // namespace

Conv1dParams::Conv1dParams(std::size_t out, std::size_t in, std::size_t k, std::size_t d)
    : out_channels(out), in_channels(in), kernel(k), dilation(d), weight(out * in * k, 0.0),
      bias(out, 0.0) {
  if (out == 0 || in == 0) throw InvalidArgument("conv1d channel counts must be positive");
  if (k == 0 || d == 0) throw InvalidArgument("conv1d kernel and dilation must be >= 1");
}

Conv1dParams Conv1dParams::zeros_like() const {
  return Conv1dParams(out_channels, in_channels, kernel, dilation);
}

void Conv1dParams::init_uniform(Rng& rng) {
  const double fan = static_cast<double>(in_channels * kernel + out_channels * kernel);
  const double limit = std::sqrt(6.0 / fan);
  for (double& v : weight) v = rng.uniform(-limit, limit);
  std::fill(bias.begin(), bias.end(), 0.0);
}

BatchNormParams::BatchNormParams(std::size_t channels)
    : gamma(channels, 1.0), beta(channels, 0.0), running_mean(channels, 0.0),
      running_var(channels, 1.0) {}

Tensor2 dilated_conv1d(const Tensor2& x, const Conv1dParams& p) {
  check_conv(x, p);
  return conv_forward(x, p);
}

Tensor2 dilated_conv1d_backward(const Tensor2& x, const Conv1dParams& p, const Tensor2& dy,
                                Conv1dParams& grads) {
  check_conv(x, p);
  return conv_backward(x, p, dy, grads);
}

Tensor2 conv1x1(const Tensor2& x, const Conv1dParams& p) {
  if (p.kernel != 1) throw ShapeError("conv1x1 requires kernel width 1");
  check_conv(x, p);
  return conv_forward(x, p);
}

Tensor2 conv1x1_backward(const Tensor2& x, const Conv1dParams& p, const Tensor2& dy,
                         Conv1dParams& grads) {
  if (p.kernel != 1) throw ShapeError("conv1x1 requires kernel width 1");
  check_conv(x, p);
  return conv_backward(x, p, dy, grads);
}

double sigmoid(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

Tensor2 gated_activation(const Tensor2& xf, const Tensor2& xg) {
  require_same_shape(xf, xg, "gated_activation");
  Tensor2 z(xf.channels, xf.time);
  for (std::size_t n = 0; n < z.data.size(); ++n) {
    z.data[n] = std::tanh(xf.data[n]) * sigmoid(xg.data[n]);
  }
  return z;
}

GatedGrads gated_activation_backward(const Tensor2& xf, const Tensor2& xg, const Tensor2& dz) {
  require_same_shape(xf, xg, "gated_activation backward");
  require_same_shape(xf, dz, "gated_activation backward");
  GatedGrads g{Tensor2(xf.channels, xf.time), Tensor2(xf.channels, xf.time)};
  for (std::size_t n = 0; n < dz.data.size(); ++n) {
    const double th = std::tanh(xf.data[n]);
    const double sg = sigmoid(xg.data[n]);
    g.dxf.data[n] = dz.data[n] * (1.0 - th * th) * sg;
    g.dxg.data[n] = dz.data[n] * th * sg * (1.0 - sg);
  }
  return g;
}

namespace {

void check_bn(const Tensor2& x, const BatchNormParams& p) {
  if (x.channels != p.channels()) {
    throw ShapeError("batch_norm: input has " + std::to_string(x.channels) +
                     " channels, parameters have " + std::to_string(p.channels()));
  }
}

}  // namespace

Tensor2 batch_norm_infer(const Tensor2& x, const BatchNormParams& p) {
  check_bn(x, p);
  Tensor2 y(x.channels, x.time);
  for (std::size_t c = 0; c < x.channels; ++c) {
    const double inv = 1.0 / std::sqrt(p.running_var[c] + p.eps);
    for (std::size_t t = 0; t < x.time; ++t) {
      y.at(c, t) = p.gamma[c] * ((x.at(c, t) - p.running_mean[c]) * inv) + p.beta[c];
    }
  }
  return y;
}

Tensor2 batch_norm(const Tensor2& x, BatchNormParams& p, Mode mode, BatchNormCache* cache) {
  if (mode == Mode::kInfer) return batch_norm_infer(x, p);
  check_bn(x, p);
  const std::size_t T = x.time;
  Tensor2 y(x.channels, T);

  if (T < 2) throw InvalidArgument("batch_norm in train mode needs at least 2 frames");
  if (cache != nullptr) {
    cache->normalized = Tensor2(x.channels, T);
    cache->inv_std.assign(x.channels, 0.0);
  }
  const double n = static_cast<double>(T);
  for (std::size_t c = 0; c < x.channels; ++c) {
    const auto xr = x.row(c);
    double mean = 0.0;
    for (double v : xr) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : xr) var += (v - mean) * (v - mean);
    var /= n;
    const double inv = 1.0 / std::sqrt(var + p.eps);
    for (std::size_t t = 0; t < T; ++t) {
      const double xhat = (xr[t] - mean) * inv;
      if (cache != nullptr) cache->normalized.at(c, t) = xhat;
      y.at(c, t) = p.gamma[c] * xhat + p.beta[c];
    }
    if (cache != nullptr) cache->inv_std[c] = inv;
    p.running_mean[c] = (1.0 - p.momentum) * p.running_mean[c] + p.momentum * mean;
    p.running_var[c] = (1.0 - p.momentum) * p.running_var[c] + p.momentum * var * n / (n - 1.0);
  }
  return y;
}

Tensor2 batch_norm_backward(const BatchNormParams& p, const BatchNormCache& cache,
                            const Tensor2& dy, BatchNormGrads& grads) {
  require_same_shape(cache.normalized, dy, "batch_norm backward");
  if (grads.gamma.size() != p.channels() || grads.beta.size() != p.channels()) {
    throw ShapeError("batch_norm backward: gradient buffer shape mismatch");
  }
  const std::size_t T = dy.time;
  const double n = static_cast<double>(T);
  Tensor2 dx(dy.channels, T);
  for (std::size_t c = 0; c < dy.channels; ++c) {
    const auto xhat = cache.normalized.row(c);
    const auto g = dy.row(c);
    double sum_g = 0.0;
    double sum_gx = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      sum_g += g[t];
      sum_gx += g[t] * xhat[t];
    }
    grads.beta[c] += sum_g;
    grads.gamma[c] += sum_gx;
    // dx = gamma * inv_std / n * (n * g - sum(g) - x_hat * sum(g * x_hat))
    const double k = p.gamma[c] * cache.inv_std[c] / n;
    for (std::size_t t = 0; t < T; ++t) {
      dx.at(c, t) = k * (n * g[t] - sum_g - xhat[t] * sum_gx);
    }
  }
  return dx;
}

Tensor2 relu(const Tensor2& x) {
  Tensor2 y = x;
  for (double& v : y.data) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor2 relu_backward(const Tensor2& x, const Tensor2& dy) {
  require_same_shape(x, dy, "relu backward");
  Tensor2 dx(x.channels, x.time);
  for (std::size_t n = 0; n < x.data.size(); ++n) dx.data[n] = x.data[n] > 0.0 ? dy.data[n] : 0.0;
  return dx;
}

Tensor2 add(const Tensor2& a, const Tensor2& b) {
  Tensor2 y = a;
  add_inplace(y, b);
  return y;
}

void add_inplace(Tensor2& acc, const Tensor2& b) {
  require_same_shape(acc, b, "add");
  for (std::size_t n = 0; n < acc.data.size(); ++n) acc.data[n] += b.data[n];
}

Tensor2 scale(const Tensor2& x, double s) {
  Tensor2 y = x;
  for (double& v : y.data) v *= s;
  return y;
}

Tensor2 scale_backward(const Tensor2& dy, double s) { return scale(dy, s); }

}  // namespace convasr::ad
