// Copyright 2026 The convasr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>

namespace convasr::utf8 {

// Strict decoder: rejects overlong forms, surrogates and truncated sequences
// with ParseError (line 0; callers rethrow with their own location).
std::u32string decode(std::string_view bytes);

bool is_valid(std::string_view bytes);

std::string encode(std::u32string_view text);

void append(std::string& out, char32_t cp);

}  // namespace convasr::utf8
