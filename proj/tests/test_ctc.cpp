// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "common/error.hpp"
#include "ctc/ctc.hpp"
#include "ctc_sweep.hpp"
#include "doctest.h"

using namespace convasr;
using ad::Tensor2;

namespace {

// A x T tensor of log-probabilities from per-frame probability columns.
Tensor2 log_probs(const std::vector<std::vector<double>>& columns) {
  Tensor2 lp(columns[0].size(), columns.size());
  for (std::size_t t = 0; t < columns.size(); ++t) {
    for (std::size_t a = 0; a < columns[t].size(); ++a) lp.at(a, t) = std::log(columns[t][a]);
  }
  return lp;
}

// Log-probs whose frame argmaxes are `ids`.
Tensor2 peaked(const std::vector<int>& ids, std::size_t a) {
  Tensor2 lp(a, ids.size(), std::log(0.1));
  for (std::size_t t = 0; t < ids.size(); ++t) lp.at(static_cast<std::size_t>(ids[t]), t) = std::log(0.7);
  return lp;
}

}  // namespace

TEST_CASE("log_softmax") {
  Tensor2 z(4, 2, 3.0);
  const auto lp = ctc::log_softmax(z);
  for (double v : lp.data) CHECK(v == doctest::Approx(std::log(0.25)));
  Tensor2 big(2, 1);
  big.data = {1000.0, 0.0};
  const auto s = ctc::log_softmax(big);
  CHECK(std::isfinite(s.data[1]));
  CHECK(s.data[0] == doctest::Approx(0.0));
  CHECK(s.data[1] == doctest::Approx(-1000.0));
}

TEST_CASE("ctc_loss small cases") {
  SUBCASE("single path") {
    const auto r = ctc::ctc_loss(log_probs({{0.4, 0.6}}), std::vector<int>{1});
    CHECK(r.nll == doctest::Approx(-std::log(0.6)).epsilon(1e-12));
    CHECK(r.nll == doctest::Approx(0.5108).epsilon(1e-4));
  }
  SUBCASE("three of four paths") {
    const auto r = ctc::ctc_loss(log_probs({{0.5, 0.5}, {0.5, 0.5}}), std::vector<int>{1});
    CHECK(r.nll == doctest::Approx(-std::log(0.75)).epsilon(1e-12));
    CHECK(r.nll == doctest::Approx(0.2877).epsilon(1e-4));
  }
  SUBCASE("repeat needs a separating blank") {
    const auto lp = log_probs({{0.5, 0.5}, {0.5, 0.5}});
    CHECK_THROWS_AS(ctc::ctc_loss(lp, std::vector<int>{1, 1}), InfeasibleLabel);
    CHECK(ctc::min_frames(std::vector<int>{1, 1}) == 3);
    CHECK(ctc::min_frames(std::vector<int>{1, 2, 2, 2}) == 6);
    CHECK(ctc::min_frames(std::vector<int>{}) == 0);
  }
  SUBCASE("empty label is all blanks") {
    const auto r = ctc::ctc_loss(log_probs({{0.3, 0.7}, {0.8, 0.2}}), std::vector<int>{});
    CHECK(r.nll == doctest::Approx(-std::log(0.3 * 0.8)).epsilon(1e-12));
  }
  SUBCASE("invalid labels") {
    const auto lp = log_probs({{0.5, 0.5}, {0.5, 0.5}});
    CHECK_THROWS_AS(ctc::ctc_loss(lp, std::vector<int>{0}), InvalidArgument);
    CHECK_THROWS_AS(ctc::ctc_loss(lp, std::vector<int>{2}), InvalidArgument);
  }
  SUBCASE("gradient columns sum to zero") {
    Tensor2 z(3, 5);
    for (std::size_t i = 0; i < z.data.size(); ++i) z.data[i] = std::sin(1.0 + i);
    const auto r = ctc::ctc_loss(ctc::log_softmax(z), std::vector<int>{1, 2});
    for (std::size_t t = 0; t < 5; ++t) {
      double s = 0.0;
      for (std::size_t a = 0; a < 3; ++a) s += r.grad_logits.at(a, t);
      CHECK(std::abs(s) < 1e-12);
    }
  }
  SUBCASE("long sequences stay finite") {
    Tensor2 z(5, 2000);
    for (std::size_t i = 0; i < z.data.size(); ++i) z.data[i] = std::sin(0.1 * i) * 5;
    std::vector<int> labels;
    for (int k = 0; k < 300; ++k) labels.push_back(1 + k % 4);
    const auto r = ctc::ctc_loss(ctc::log_softmax(z), labels);
    CHECK(std::isfinite(r.nll));
    CHECK(r.nll > 0);
  }
}

TEST_CASE("ctc_loss matches exhaustive enumeration") {
  const auto r = testing::ctc_sweep(6, 4, 3, 17);
  // 6 lengths times the label sequences of length <= 3 over 1, 2 and 3 symbols.
  CHECK(r.instances + r.infeasible == 6 * (4 + 15 + 40));
  CHECK(r.infeasible > 0);
  CHECK(r.rejection_ok);
  CHECK(r.max_nll_error < 1e-9);
  CHECK(r.max_grad_error < 1e-5);
}

TEST_CASE("greedy decode") {
  CHECK(ctc::greedy_decode(peaked({0, 1, 1, 0, 2}, 3)) == std::vector<int>{1, 2});
  CHECK(ctc::greedy_decode(peaked({0, 0, 0}, 3)).empty());
  CHECK(ctc::greedy_decode(peaked({1, 0, 1}, 3)) == std::vector<int>{1, 1});
  // Ties go to the lowest index, here the blank.
  CHECK(ctc::greedy_decode(Tensor2(3, 4, -1.0)).empty());
  for (int id : ctc::greedy_decode(peaked({2, 2, 0, 1, 0, 0, 2}, 3))) CHECK(id != ctc::kBlank);
}
