// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#include "translit/translit.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "common/error.hpp"
#include "common/utf8.hpp"

namespace convasr::translit {

namespace {

std::string codepoint_name(char32_t cp) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "U+%04X", static_cast<unsigned>(cp));
  return buf;
}

bool is_roman_symbol(char c) { return c > ' ' && c < 0x7f; }

}  // namespace

bool is_diacritic(char32_t cp) { return (cp >= 0x064B && cp <= 0x065F) || cp == 0x0670; }

TranslitTable::TranslitTable(std::vector<std::pair<char32_t, char>> pairs)
    : pairs_(std::move(pairs)) {
  to_arabic_.fill(0);
  to_roman_.emplace(U' ', ' ');
  to_arabic_[' '] = U' ';
  for (const auto& [cp, roman] : pairs_) {
    if (cp == U' ' || roman == ' ') throw InvalidArgument("space is reserved to map to itself");
    if (is_diacritic(cp)) {
      throw InvalidArgument("table maps diacritic " + codepoint_name(cp));
    }
    if (!is_roman_symbol(roman)) {
      throw InvalidArgument("roman symbol for " + codepoint_name(cp) +
                            " is not a printable ASCII character");
    }
    if (!to_roman_.emplace(cp, roman).second) {
      throw InvalidArgument("duplicate Arabic entry " + codepoint_name(cp));
    }
    auto& slot = to_arabic_[static_cast<unsigned char>(roman)];
    if (slot != 0) throw InvalidArgument(std::string("duplicate roman symbol '") + roman + "'");
    slot = cp;
  }
}

bool TranslitTable::has_roman(char c) const {
  const auto u = static_cast<unsigned char>(c);
  return u < 128 && to_arabic_[u] != 0;
}

TranslitTable TranslitTable::parse(std::string_view text) {
  std::vector<std::pair<char32_t, char>> pairs;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;

    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) throw ParseError("expected arabic<TAB>roman", line_no);
    std::u32string arabic;
    try {
      arabic = utf8::decode(line.substr(0, tab));
    } catch (const ParseError&) {
      throw ParseError("invalid UTF-8", line_no);
    }
    const std::string_view roman = line.substr(tab + 1);
    if (arabic.size() != 1 || roman.size() != 1) {
      throw ParseError("each side must be exactly one character", line_no);
    }
    pairs.emplace_back(arabic[0], roman[0]);
  }
  return TranslitTable(std::move(pairs));
}

TranslitTable TranslitTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open transliteration table " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string TranslitTable::to_roman(std::string_view arabic_utf8) const {
  const std::u32string text = utf8::decode(arabic_utf8);
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char32_t cp = text[i];
    const auto it = to_roman_.find(cp);
    if (it == to_roman_.end()) {
      if (is_diacritic(cp)) {
        throw DiacriticFound("diacritic " + codepoint_name(cp) + " at position " +
                                 std::to_string(i) + " (transcripts must be undiacritized)",
                             cp, i);
      }
      throw UnmappedSymbol("unmapped character " + codepoint_name(cp) + " at position " +
                               std::to_string(i),
                           cp, i);
    }
    out.push_back(it->second);
  }
  return out;
}

std::string TranslitTable::to_arabic(std::string_view roman) const {
  std::string out;
  out.reserve(roman.size() * 2);
  for (std::size_t i = 0; i < roman.size(); ++i) {
    const auto u = static_cast<unsigned char>(roman[i]);
    if (u >= 128 || to_arabic_[u] == 0) {
      throw UnmappedSymbol("unmapped roman symbol " + codepoint_name(u) + " at position " +
                               std::to_string(i),
                           u, i);
    }
    utf8::append(out, to_arabic_[u]);
  }
  return out;
}

std::string arabic_to_roman(std::string_view text, const TranslitTable& table) {
  return table.to_roman(text);
}

std::string roman_to_arabic(std::string_view text, const TranslitTable& table) {
  return table.to_arabic(text);
}

Alphabet::Alphabet(std::vector<char> symbols) : symbols_(std::move(symbols)) {
  index_.fill(-1);
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    auto& slot = index_[static_cast<unsigned char>(symbols_[i])];
    if (slot != -1) throw InvalidArgument("alphabet symbols must be distinct");
    slot = static_cast<int>(i) + 1;
  }
}

Alphabet Alphabet::from_table(const TranslitTable& table) {
  std::vector<char> symbols{' '};
  for (const auto& [cp, roman] : table.pairs()) symbols.push_back(roman);
  std::sort(symbols.begin(), symbols.end());
  return Alphabet(std::move(symbols));
}

std::vector<int> encode_labels(std::string_view text, const Alphabet& alphabet) {
  std::vector<int> ids;
  ids.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const int id = alphabet.id_of(text[i]);
    if (id < 1) {
      throw UnmappedSymbol(std::string("symbol '") + text[i] + "' at position " +
                               std::to_string(i) + " is not in the alphabet",
                           static_cast<unsigned char>(text[i]), i);
    }
    ids.push_back(id);
  }
  return ids;
}

std::string decode_ids(const std::vector<int>& ids, const Alphabet& alphabet) {
  std::string out;
  out.reserve(ids.size());
  for (int id : ids) {
    if (id == Alphabet::kBlank) throw InvalidArgument("blank id in label sequence");
    if (id < 0 || id >= alphabet.size()) {
      throw InvalidArgument("label id " + std::to_string(id) + " outside the alphabet");
    }
    out.push_back(alphabet.symbol(id));
  }
  return out;
}

}  // namespace convasr::translit
