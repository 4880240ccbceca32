// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace convasr::translit {

// Arabic harakat, tanween, shadda, sukun and the superscript alef. Transcripts
// are undiacritized, so these never belong to a table domain.
bool is_diacritic(char32_t cp);

// Bijection between Arabic codepoints and single ASCII symbols (Buckwalter).
// Space always maps to itself and is added implicitly.
class TranslitTable {
 public:
  // Throws InvalidArgument when the pairs are not a bijection, contain a
  // diacritic, or try to remap space.
  explicit TranslitTable(std::vector<std::pair<char32_t, char>> pairs);

  // Fixture format: UTF-8, one "arabic<TAB>roman" pair per line, lines
  // starting with '#' and blank lines ignored.
  static TranslitTable load(const std::filesystem::path& path);
  static TranslitTable parse(std::string_view text);

  // Explicit pairs in fixture order, space excluded.
  const std::vector<std::pair<char32_t, char>>& pairs() const { return pairs_; }

  bool has_arabic(char32_t cp) const { return to_roman_.contains(cp); }
  bool has_roman(char c) const;

  // Throws DiacriticFound / UnmappedSymbol with the character position.
  std::string to_roman(std::string_view arabic_utf8) const;
  std::string to_arabic(std::string_view roman) const;

 private:
  std::vector<std::pair<char32_t, char>> pairs_;
  std::unordered_map<char32_t, char> to_roman_;
  std::array<char32_t, 128> to_arabic_{};
};

std::string arabic_to_roman(std::string_view text, const TranslitTable& table);
std::string roman_to_arabic(std::string_view text, const TranslitTable& table);

// CTC output symbols. Index 0 is the blank and has no character.
class Alphabet {
 public:
  static constexpr int kBlank = 0;

  // `symbols` excludes the blank; they must be pairwise distinct.
  explicit Alphabet(std::vector<char> symbols);

  // {blank} + {space} + table range, sorted by byte value.
  static Alphabet from_table(const TranslitTable& table);

  // Number of outputs including the blank.
  int size() const { return static_cast<int>(symbols_.size()) + 1; }
  // Symbol for id in [1, size).
  char symbol(int id) const { return symbols_[static_cast<std::size_t>(id - 1)]; }
  const std::vector<char>& symbols() const { return symbols_; }
  int id_of(char c) const { return index_[static_cast<unsigned char>(c)]; }

  bool operator==(const Alphabet& other) const { return symbols_ == other.symbols_; }

 private:
  std::vector<char> symbols_;
  std::array<int, 256> index_{};
};

// One id per character, each in [1, size). Throws UnmappedSymbol.
std::vector<int> encode_labels(std::string_view text, const Alphabet& alphabet);

// Inverse of encode_labels. Throws InvalidArgument on blank or out-of-range ids.
std::string decode_ids(const std::vector<int>& ids, const Alphabet& alphabet);

}  // namespace convasr::translit
