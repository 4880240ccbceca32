// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#include "corpus/corpus.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "common/utf8.hpp"

namespace convasr::corpus {

namespace {

// Records the one-based line each row starts on into `starts`.
std::vector<std::vector<std::string>> parse_rows(std::string_view text,
                                                 std::vector<std::size_t>& starts) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;  // anything seen on the current row
  std::size_t line = 1;
  std::size_t quote_line = 0;
  std::size_t row_line = 1;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    starts.push_back(row_line);
    row.clear();
    field_started = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
          const char next = i + 1 < text.size() ? text[i + 1] : '\n';
          if (next != ',' && next != '\n' && next != '\r') {
            throw ParseError("unexpected character after closing quote", line);
          }
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty()) throw ParseError("quote inside an unquoted field", line);
        in_quotes = true;
        quote_line = line;
        field_started = true;
        break;
      case ',':
        end_field();
        field_started = true;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        [[fallthrough]];
      case '\n':
        end_row();
        row_line = ++line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted field", quote_line);
  if (field_started || !field.empty()) end_row();
  return rows;
}

}  // namespace

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::size_t> starts;
  return parse_rows(text, starts);
}

std::vector<ManifestEntry> parse_manifest(std::string_view text) {
  if (!utf8::is_valid(text)) {
    std::size_t line = 1;
    // Locate the offending line for the diagnostic.
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      if (!utf8::is_valid(text.substr(start, end - start))) break;
      start = end + 1;
      ++line;
    }
    throw ParseError("manifest is not valid UTF-8", line);
  }
  std::vector<ManifestEntry> entries;
  std::vector<std::size_t> lines;
  const auto rows = parse_rows(text, lines);
  entries.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() == 1 && row[0].empty()) continue;  // blank line
    if (row.size() != 2) {
      throw ParseError("expected 2 fields, found " + std::to_string(row.size()), lines[r]);
    }
    if (row[0].empty()) throw ParseError("empty audio path", lines[r]);
    if (row[1].empty()) throw ParseError("empty transcript", lines[r]);
    entries.push_back({row[0], row[1]});
  }
  return entries;
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  if (text.starts_with("\xEF\xBB\xBF")) text.erase(0, 3);
  try {
    return parse_manifest(text);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

std::string format_manifest(const std::vector<ManifestEntry>& entries) {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out.push_back('"');
      out.push_back(c);
    }
    out.push_back('"');
    return out;
  };
  std::string out;
  for (const auto& e : entries) {
    out += quote(e.audio_path);
    out += ',';
    out += quote(e.transcript);
    out += '\n';
  }
  return out;
}

std::pair<std::vector<ManifestEntry>, std::vector<ManifestEntry>> split(
    const std::vector<ManifestEntry>& entries, const SplitSpec& spec) {
  if (entries.empty()) throw InvalidArgument("cannot split an empty manifest");
  if (!(spec.train_fraction > 0.0 && spec.train_fraction <= 1.0)) {
    throw InvalidArgument("train_fraction must lie in (0, 1]");
  }
  std::vector<ManifestEntry> shuffled = entries;
  Rng rng(spec.seed);
  shuffle(shuffled, rng);
  const auto n_train = std::min(
      entries.size(),
      static_cast<std::size_t>(std::ceil(static_cast<double>(entries.size()) * spec.train_fraction)));
  std::vector<ManifestEntry> train(shuffled.begin(), shuffled.begin() + n_train);
  std::vector<ManifestEntry> eval(shuffled.begin() + n_train, shuffled.end());
  return {std::move(train), std::move(eval)};
}

std::vector<std::vector<std::size_t>> batch_indices(std::size_t count, std::size_t batch_size,
                                                    std::uint64_t seed) {
  if (batch_size == 0) throw InvalidArgument("batch_size must be at least 1");
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  shuffle(order, rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < count; start += batch_size) {
    const std::size_t end = std::min(count, start + batch_size);
    batches.emplace_back(order.begin() + start, order.begin() + end);
  }
  return batches;
}

std::vector<std::vector<ManifestEntry>> make_batches(const std::vector<ManifestEntry>& entries,
                                                     std::size_t batch_size, std::uint64_t seed) {
  std::vector<std::vector<ManifestEntry>> batches;
  for (const auto& idx : batch_indices(entries.size(), batch_size, seed)) {
    auto& batch = batches.emplace_back();
    batch.reserve(idx.size());
    for (std::size_t i : idx) batch.push_back(entries[i]);
  }
  return batches;
}

}  // namespace convasr::corpus
