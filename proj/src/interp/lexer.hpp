// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tessera::interp {

enum class Tok {
    Ident, Int, Float, String, NvArg,
    Op,        // operators and punctuation, spelled in `text`
    Newline, End,
};

struct Token {
    Tok kind;
    std::string text;
    int line;
    int column;
};

/// Splits a script into tokens. Newlines inside () and [] are dropped.
std::vector<Token> tokenize(std::string_view src);

} // namespace tessera::interp
