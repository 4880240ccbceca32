// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace convasr::ctc {

// Levenshtein distance with unit insert, delete and substitute costs.
std::size_t edit_distance(std::span<const int> a, std::span<const int> b);

struct LerSummary {
  std::size_t total_edits = 0;
  std::size_t total_reference = 0;
  // 100 * total_edits / total_reference.
  double ler_percent = 0.0;
  // 100 - LER, floored at 0 when LER exceeds 100%.
  double accuracy_percent = 100.0;
};

using LabelPair = std::pair<std::vector<int>, std::vector<int>>;  // (reference, hypothesis)

// Corpus-level rate: summed edits over summed reference lengths, not a mean of
// per-utterance ratios. Throws InvalidArgument on an empty reference.
LerSummary label_error_rate(std::span<const LabelPair> pairs);

// Same, from precomputed (distance, reference length) counts.
LerSummary label_error_rate_from_counts(std::span<const std::pair<std::size_t, std::size_t>> counts);

}  // namespace convasr::ctc
