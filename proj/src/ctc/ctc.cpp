// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctc/ctc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "common/error.hpp"

namespace convasr::ctc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace

Tensor2 log_softmax(const Tensor2& logits) {
  const std::size_t A = logits.channels;
  const std::size_t T = logits.time;
  Tensor2 out(A, T);
  for (std::size_t t = 0; t < T; ++t) {
    double mx = kNegInf;
    for (std::size_t a = 0; a < A; ++a) mx = std::max(mx, logits.at(a, t));
    double sum = 0.0;
    for (std::size_t a = 0; a < A; ++a) sum += std::exp(logits.at(a, t) - mx);
    const double lse = mx + std::log(sum);
    for (std::size_t a = 0; a < A; ++a) out.at(a, t) = logits.at(a, t) - lse;
  }
  return out;
}

std::size_t min_frames(std::span<const int> labels) {
  std::size_t n = labels.size();
  for (std::size_t i = 1; i < labels.size(); ++i) {
    if (labels[i] == labels[i - 1]) ++n;
  }
  return n;
}

CtcResult ctc_loss(const Tensor2& log_probs, std::span<const int> labels) {
  const std::size_t A = log_probs.channels;
  const std::size_t T = log_probs.time;
  const std::size_t L = labels.size();
  for (int id : labels) {
    if (id == kBlank) throw InvalidArgument("label sequence contains the blank id");
    if (id < 0 || static_cast<std::size_t>(id) >= A) {
      throw InvalidArgument("label id " + std::to_string(id) + " outside the " +
                            std::to_string(A) + "-symbol output");
    }
  }
  const std::size_t needed = min_frames(labels);
  if (T < needed || T == 0) {
    throw InfeasibleLabel("label of length " + std::to_string(L) + " needs at least " +
                          std::to_string(std::max<std::size_t>(needed, 1)) + " frames, got " +
                          std::to_string(T));
  }

  // Extended sequence: blank, l1, blank, l2, ..., lL, blank.
  const std::size_t S = 2 * L + 1;
  std::vector<int> ext(S, kBlank);
  for (std::size_t i = 0; i < L; ++i) ext[2 * i + 1] = labels[i];
  // Skip transition s-2 -> s is allowed into a non-blank that differs from the
  // previous non-blank.
  auto can_skip = [&](std::size_t s) { return s >= 2 && ext[s] != kBlank && ext[s] != ext[s - 2]; };

  // alpha includes the emission at t; beta covers frames t+1..T-1.
  std::vector<double> alpha(S * T, kNegInf);
  std::vector<double> beta(S * T, kNegInf);
  auto lp = [&](std::size_t s, std::size_t t) {
    return log_probs.at(static_cast<std::size_t>(ext[s]), t);
  };

  alpha[0] = lp(0, 0);
  if (S > 1) alpha[1] = lp(1, 0);
  for (std::size_t t = 1; t < T; ++t) {
    const double* prev = alpha.data() + (t - 1) * S;
    double* cur = alpha.data() + t * S;
    for (std::size_t s = 0; s < S; ++s) {
      double acc = prev[s];
      if (s >= 1) acc = log_add(acc, prev[s - 1]);
      if (can_skip(s)) acc = log_add(acc, prev[s - 2]);
      cur[s] = acc == kNegInf ? kNegInf : acc + lp(s, t);
    }
  }

  double* last = beta.data() + (T - 1) * S;
  last[S - 1] = 0.0;
  if (S > 1) last[S - 2] = 0.0;
  for (std::size_t t = T - 1; t-- > 0;) {
    const double* next = beta.data() + (t + 1) * S;
    double* cur = beta.data() + t * S;
    for (std::size_t s = 0; s < S; ++s) {
      double acc = next[s] + lp(s, t + 1);
      if (s + 1 < S) acc = log_add(acc, next[s + 1] + lp(s + 1, t + 1));
      if (s + 2 < S && can_skip(s + 2)) acc = log_add(acc, next[s + 2] + lp(s + 2, t + 1));
      cur[s] = acc;
    }
  }

  const double* final_alpha = alpha.data() + (T - 1) * S;
  double log_p = final_alpha[S - 1];
  if (S > 1) log_p = log_add(log_p, final_alpha[S - 2]);
  if (log_p == kNegInf) throw InfeasibleLabel("label has zero probability under the model");

  CtcResult result;
  result.nll = std::max(0.0, -log_p);
  result.grad_logits = Tensor2(A, T);
  std::vector<double> occupancy(A);
  for (std::size_t t = 0; t < T; ++t) {
    std::fill(occupancy.begin(), occupancy.end(), kNegInf);
    for (std::size_t s = 0; s < S; ++s) {
      const double v = alpha[t * S + s] + beta[t * S + s];
      auto& slot = occupancy[static_cast<std::size_t>(ext[s])];
      slot = log_add(slot, v);
    }
    for (std::size_t a = 0; a < A; ++a) {
      result.grad_logits.at(a, t) =
          std::exp(log_probs.at(a, t)) - std::exp(occupancy[a] - log_p);
    }
  }
  return result;
}

std::vector<int> greedy_decode(const Tensor2& log_probs) {
  std::vector<int> out;
  int prev = kBlank;
  for (std::size_t t = 0; t < log_probs.time; ++t) {
    int best = 0;
    for (std::size_t a = 1; a < log_probs.channels; ++a) {
      if (log_probs.at(a, t) > log_probs.at(static_cast<std::size_t>(best), t)) {
        best = static_cast<int>(a);
      }
    }
    if (best != kBlank && best != prev) out.push_back(best);
    prev = best;
  }
  return out;
}

}  // namespace convasr::ctc
