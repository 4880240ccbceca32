// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include "autodiff/grad_check.hpp"
#include "autodiff/ops.hpp"
#include "common/error.hpp"
#include "doctest.h"
#include "op_probes.hpp"

using namespace convasr;
using ad::Tensor2;
using testing::dot;
using testing::random_conv;
using testing::random_tensor;

namespace {

// Direct evaluation of the padded-convolution sum.
Tensor2 naive_conv(const Tensor2& x, const ad::Conv1dParams& p) {
  const long left = static_cast<long>((p.kernel - 1) * p.dilation / 2);
  Tensor2 y(p.out_channels, x.time);
  for (std::size_t o = 0; o < p.out_channels; ++o) {
    for (std::size_t t = 0; t < x.time; ++t) {
      double acc = p.bias[o];
      for (std::size_t i = 0; i < p.in_channels; ++i) {
        for (std::size_t k = 0; k < p.kernel; ++k) {
          const long src = static_cast<long>(t) + static_cast<long>(k * p.dilation) - left;
          if (src >= 0 && src < static_cast<long>(x.time)) {
            acc += p.w(o, i, k) * x.at(i, static_cast<std::size_t>(src));
          }
        }
      }
      y.at(o, t) = acc;
    }
  }
  return y;
}

}  // namespace

TEST_CASE("dilated conv: identity, zeros and the naive sum") {
  std::mt19937_64 g(1);
  SUBCASE("K=1 identity") {
    ad::Conv1dParams p(3, 3, 1, 1);
    for (std::size_t c = 0; c < 3; ++c) p.w(c, c, 0) = 1.0;
    const auto x = random_tensor(3, 9, g);
    CHECK(ad::dilated_conv1d(x, p) == x);
  }
  SUBCASE("zero parameters") {
    ad::Conv1dParams p(2, 3, 2, 4);
    const auto y = ad::dilated_conv1d(random_tensor(3, 9, g), p);
    for (double v : y.data) CHECK(v == 0.0);
  }
  SUBCASE("K=2, d=2 on [1,2,3,4]") {
    ad::Conv1dParams p(1, 1, 2, 2);
    p.weight = {1.0, 1.0};
    Tensor2 x(1, 4);
    x.data = {1, 2, 3, 4};
    // left pad 1: y[t] = x[t-1] + x[t+1]
    const auto y = ad::dilated_conv1d(x, p);
    CHECK(y.data == std::vector<double>{2, 4, 6, 3});
    CHECK(y == naive_conv(x, p));
  }
  SUBCASE("random shapes") {
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t i = 1 + g() % 4, o = 1 + g() % 4, k = 1 + g() % 3, d = 1 + g() % 5;
      const std::size_t t = 1 + g() % 20;
      const auto p = random_conv(o, i, k, d, g);
      const auto x = random_tensor(i, t, g);
      const auto y = ad::dilated_conv1d(x, p);
      const auto ref = naive_conv(x, p);
      for (std::size_t n = 0; n < y.data.size(); ++n) CHECK(y.data[n] == doctest::Approx(ref.data[n]).epsilon(1e-12));
    }
  }
  SUBCASE("shape errors") {
    ad::Conv1dParams p(1, 2, 2, 1);
    CHECK_THROWS_AS(ad::dilated_conv1d(Tensor2(3, 4), p), ShapeError);
  }
}

TEST_CASE("conv1x1") {
  std::mt19937_64 g(2);
  SUBCASE("identity") {
    ad::Conv1dParams p(4, 4, 1, 1);
    for (std::size_t c = 0; c < 4; ++c) p.w(c, c, 0) = 1.0;
    const auto x = random_tensor(4, 6, g);
    CHECK(ad::conv1x1(x, p) == x);
  }
  SUBCASE("dot product") {
    ad::Conv1dParams p(1, 2, 1, 1);
    p.weight = {2, 3};
    Tensor2 x(2, 1);
    x.data = {1, 1};
    CHECK(ad::conv1x1(x, p).data == std::vector<double>{5});
  }
  SUBCASE("bitwise agreement with the general kernel") {
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t i = 1 + g() % 6, o = 1 + g() % 6, t = 1 + g() % 30;
      const auto p = random_conv(o, i, 1, 1, g);
      const auto x = random_tensor(i, t, g);
      CHECK(ad::conv1x1(x, p) == ad::dilated_conv1d(x, p));
    }
  }
  SUBCASE("rejects a wider kernel") {
    ad::Conv1dParams p(1, 1, 2, 1);
    CHECK_THROWS_AS(ad::conv1x1(Tensor2(1, 3), p), ShapeError);
  }
}

TEST_CASE("gated activation values") {
  Tensor2 f(1, 3), gt(1, 3);
  f.data = {0.0, 1.0, 0.3};
  gt.data = {-2.0, 1.0, 30.0};
  const auto z = ad::gated_activation(f, gt);
  CHECK(z.data[0] == 0.0);
  CHECK(z.data[1] == doctest::Approx(std::tanh(1.0) / (1.0 + std::exp(-1.0))).epsilon(1e-12));
  CHECK(std::abs(z.data[1] - 0.556770) < 1e-6);
  CHECK(std::abs(z.data[2] - std::tanh(0.3)) < 1e-9);
  CHECK(ad::sigmoid(-800.0) >= 0.0);
  CHECK(ad::sigmoid(800.0) == 1.0);
  CHECK_THROWS_AS(ad::gated_activation(Tensor2(1, 3), Tensor2(1, 4)), ShapeError);
}

TEST_CASE("batch norm forward") {
  std::mt19937_64 g(3);
  SUBCASE("train mode standardizes each channel") {
    ad::BatchNormParams p(3);
    auto x = random_tensor(3, 50, g, 4.0);
    for (double& v : x.data) v += 7.0;
    const auto y = ad::batch_norm(x, p, ad::Mode::kTrain);
    for (std::size_t c = 0; c < 3; ++c) {
      double mean = 0.0, var = 0.0;
      for (std::size_t t = 0; t < 50; ++t) mean += y.at(c, t);
      mean /= 50;
      for (std::size_t t = 0; t < 50; ++t) var += (y.at(c, t) - mean) * (y.at(c, t) - mean);
      var /= 50;
      CHECK(std::abs(mean) < 1e-6);
      CHECK(std::abs(var - 1.0) < 1e-4);
    }
  }
  SUBCASE("constant channel maps to zero") {
    ad::BatchNormParams p(1);
    Tensor2 x(1, 5);
    x.data.assign(5, 3.25);
    const auto y = ad::batch_norm(x, p, ad::Mode::kTrain);
    for (double v : y.data) CHECK(v == 0.0);
  }
  SUBCASE("running statistics follow the momentum rule") {
    ad::BatchNormParams p(1);
    Tensor2 x(1, 4);
    x.data = {1, 2, 3, 6};  // mean 3, unbiased variance 14/3
    ad::batch_norm(x, p, ad::Mode::kTrain);
    CHECK(p.running_mean[0] == doctest::Approx(0.9 * 0.0 + 0.1 * 3.0));
    CHECK(p.running_var[0] == doctest::Approx(0.9 * 1.0 + 0.1 * 14.0 / 3.0));
  }
  SUBCASE("infer mode is affine with running statistics") {
    ad::BatchNormParams p(1);
    p.gamma = {2.0};
    p.beta = {1.0};
    Tensor2 x(1, 1);
    x.data = {0.5};
    const auto before = p;
    const auto y = ad::batch_norm(x, p, ad::Mode::kInfer);
    CHECK(y.data[0] == doctest::Approx(2.0 * 0.5 / std::sqrt(1.0 + 1e-5) + 1.0));
    CHECK(std::abs(y.data[0] - 2.0) < 1e-5);
    CHECK(p == before);
    CHECK(ad::batch_norm_infer(x, p) == y);
  }
  SUBCASE("errors") {
    ad::BatchNormParams p(2);
    CHECK_THROWS_AS(ad::batch_norm(Tensor2(3, 4), p, ad::Mode::kTrain), ShapeError);
    CHECK_THROWS_AS(ad::batch_norm(Tensor2(2, 1), p, ad::Mode::kTrain), InvalidArgument);
    CHECK_NOTHROW(ad::batch_norm(Tensor2(2, 1), p, ad::Mode::kInfer));
  }
}

TEST_CASE("elementwise helpers") {
  Tensor2 x(1, 2);
  x.data = {-1.0, 2.0};
  CHECK(ad::relu(x).data == std::vector<double>{0.0, 2.0});
  CHECK(ad::add(x, Tensor2(1, 2)) == x);
  CHECK(ad::scale(x, 3.0).data == std::vector<double>{-3.0, 6.0});
  Tensor2 zero(1, 1);
  Tensor2 dy(1, 1);
  dy.data = {1.0};
  CHECK(ad::relu_backward(zero, dy).data[0] == 0.0);
  CHECK_THROWS_AS(ad::add(x, Tensor2(2, 1)), ShapeError);
}

TEST_CASE("grad_check on a linear function is exact") {
  const std::vector<double> c = {1.5, -2.0, 0.25};
  const ad::Objective f = [&](std::span<const double> x, std::span<double> grad) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      s += c[i] * x[i];
      if (!grad.empty()) grad[i] = c[i];
    }
    return s;
  };
  CHECK(ad::grad_check(f, std::vector<double>{0.3, 4.0, -1.0}) < 1e-9);
  // A wrong gradient is caught.
  const ad::Objective wrong = [&](std::span<const double> x, std::span<double> grad) {
    const double v = f(x, grad);
    if (!grad.empty()) grad[0] += 0.1;
    return v;
  };
  CHECK(ad::grad_check(wrong, std::vector<double>{0.3, 4.0, -1.0}) > 1e-2);
}

TEST_CASE("layer gradients match finite differences") {
  CHECK(testing::conv_grad_error(4) < 1e-5);
  CHECK(testing::conv1x1_grad_error(5) < 1e-5);
  CHECK(testing::gated_grad_error(6) < 1e-5);
  CHECK(testing::batch_norm_grad_error(7) < 1e-5);
  CHECK(testing::elementwise_grad_error(8) < 1e-5);
}
