// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace convasr {

// Root of every exception the core throws. The C API maps each subclass to a
// distinct status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed RIFF/WAVE container.
class WavFormatError : public Error {
 public:
  using Error::Error;
};

// Well-formed container carrying a codec or bit depth we do not decode.
class UnsupportedAudio : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A character with no entry in the transliteration table or alphabet.
class UnmappedSymbol : public Error {
 public:
  UnmappedSymbol(const std::string& what, char32_t codepoint, std::size_t position)
      : Error(what), codepoint_(codepoint), position_(position) {}
  char32_t codepoint() const { return codepoint_; }
  // Zero-based character (not byte) offset in the input.
  std::size_t position() const { return position_; }

 private:
  char32_t codepoint_;
  std::size_t position_;
};

class DiacriticFound : public UnmappedSymbol {
 public:
  using UnmappedSymbol::UnmappedSymbol;
};

class InfeasibleLabel : public Error {
 public:
  using Error::Error;
};

class CorruptCheckpoint : public Error {
 public:
  using Error::Error;
};

class VersionMismatch : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace convasr
