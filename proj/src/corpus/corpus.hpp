// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace convasr::corpus {

struct ManifestEntry {
  std::string audio_path;
  std::string transcript;

  bool operator==(const ManifestEntry&) const = default;
};

struct SplitSpec {
  double train_fraction = 0.9;
  std::uint64_t seed = 0;
};

// RFC-4180 records: fields separated by commas, optionally double-quoted, with
// "" escaping a quote inside a quoted field. CRLF and LF line endings.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

// Two-column manifest without a header row. Throws ParseError for a row with a
// field count other than two, an empty field, or bytes that are not UTF-8.
std::vector<ManifestEntry> parse_manifest(std::string_view text);
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);

// Quotes fields only when they contain a comma, quote or line break.
std::string format_manifest(const std::vector<ManifestEntry>& entries);

// Seeded shuffle, then the first ceil(n * train_fraction) entries train.
std::pair<std::vector<ManifestEntry>, std::vector<ManifestEntry>> split(
    const std::vector<ManifestEntry>& entries, const SplitSpec& spec);

// Seeded shuffle, then chunks of batch_size; the short tail batch is kept.
std::vector<std::vector<ManifestEntry>> make_batches(const std::vector<ManifestEntry>& entries,
                                                     std::size_t batch_size, std::uint64_t seed);

// The index permutation make_batches applies, chunked. Shared with the
// trainer, which batches utterances rather than manifest rows.
std::vector<std::vector<std::size_t>> batch_indices(std::size_t count, std::size_t batch_size,
                                                    std::uint64_t seed);

}  // namespace convasr::corpus
