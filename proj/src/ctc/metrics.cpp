// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctc/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "common/error.hpp"

namespace convasr::ctc {

std::size_t edit_distance(std::span<const int> a, std::span<const int> b) {
  // Single rolling row over b.
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({up + 1, row[j - 1] + 1, sub});
      diag = up;
    }
  }
  return row[b.size()];
}

LerSummary label_error_rate_from_counts(
    std::span<const std::pair<std::size_t, std::size_t>> counts) {
  LerSummary s;
  for (const auto& [dist, ref_len] : counts) {
    if (ref_len == 0) throw InvalidArgument("label error rate needs non-empty references");
    s.total_edits += dist;
    s.total_reference += ref_len;
  }
  if (s.total_reference == 0) throw InvalidArgument("label error rate over an empty set");
  s.ler_percent = 100.0 * static_cast<double>(s.total_edits) / static_cast<double>(s.total_reference);
  s.accuracy_percent = std::max(0.0, 100.0 - s.ler_percent);
  return s;
}

LerSummary label_error_rate(std::span<const LabelPair> pairs) {
  std::vector<std::pair<std::size_t, std::size_t>> counts;
  counts.reserve(pairs.size());
  for (const auto& [ref, hyp] : pairs) {
    if (ref.empty()) throw InvalidArgument("label error rate needs non-empty references");
    counts.emplace_back(edit_distance(ref, hyp), ref.size());
  }
  return label_error_rate_from_counts(counts);
}

}  // namespace convasr::ctc
