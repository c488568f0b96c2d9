// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include "lexer.hpp"

#include <cctype>

#include "tessera/interp/ast.hpp"

namespace tessera::interp {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }

} // namespace

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    std::vector<char> nesting;
    int line = 1, col = 1;
    std::size_t i = 0;
    const auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    const auto push = [&](Tok kind, std::string text, int l, int c) { out.push_back({kind, std::move(text), l, c}); };

    while (i < src.size()) {
        const char c = src[i];
        const int l = line, cc = col;
        if (c == '#') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        if (c == '\n') {
            advance(1);
            const bool grouped = !nesting.empty() && nesting.back() != '{';
            if (!grouped && (out.empty() || out.back().kind != Tok::Newline)) push(Tok::Newline, "\n", l, cc);
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\r') {
            advance(1);
            continue;
        }
        if (ident_start(c)) {
            std::size_t j = i;
            while (j < src.size() && ident_char(src[j])) ++j;
            push(Tok::Ident, std::string(src.substr(i, j - i)), l, cc);
            advance(j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            std::size_t j = i;
            bool is_float = false;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            if (j < src.size() && src[j] == '.') {
                is_float = true;
                ++j;
                while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            }
            if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
                if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
                    is_float = true;
                    j = k;
                    while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
                }
            }
            push(is_float ? Tok::Float : Tok::Int, std::string(src.substr(i, j - i)), l, cc);
            advance(j - i);
            continue;
        }
        if (c == '"' || c == '\'') {
            std::string text;
            std::size_t j = i + 1;
            bool closed = false;
            while (j < src.size()) {
                const char d = src[j];
                if (d == c) {
                    closed = true;
                    break;
                }
                if (d == '\n') break;
                if (d == '\\' && j + 1 < src.size()) {
                    const char e = src[j + 1];
                    switch (e) {
                    case 'n': text += '\n'; break;
                    case 't': text += '\t'; break;
                    case 'r': text += '\r'; break;
                    case '0': text += '\0'; break;
                    default: text += e; break;
                    }
                    j += 2;
                    continue;
                }
                text += d;
                ++j;
            }
            if (!closed) throw SyntaxError("unterminated string literal", l, cc);
            push(Tok::String, std::move(text), l, cc);
            advance(j + 1 - i);
            continue;
        }
        if (c == '$') {
            std::size_t j = i + 1;
            while (j < src.size() && ident_char(src[j])) ++j;
            if (j == i + 1) throw SyntaxError("expected a name after '$'", l, cc);
            push(Tok::NvArg, std::string(src.substr(i + 1, j - i - 1)), l, cc);
            advance(j - i);
            continue;
        }
        if (c == '%') {
            const auto end = src.find('%', i + 1);
            if (end == std::string_view::npos || end - i > 4) throw SyntaxError("malformed %-operator", l, cc);
            const std::string op(src.substr(i, end - i + 1));
            if (op != "%*%" && op != "%%" && op != "%/%") throw SyntaxError("unknown operator '" + op + "'", l, cc);
            push(Tok::Op, op, l, cc);
            advance(op.size());
            continue;
        }
        static const char* two[] = {"<-", "<=", ">=", "==", "!=", "&&", "||"};
        bool matched = false;
        for (const char* t : two)
            if (src.substr(i, 2) == t) {
                // "a<-1" is an assignment in R as well.
                push(Tok::Op, t, l, cc);
                advance(2);
                matched = true;
                break;
            }
        if (matched) continue;
        static const std::string_view single = "+-*/^<>=!&|:,;()[]{}";
        if (single.find(c) != std::string_view::npos) {
            if (c == '(' || c == '[' || c == '{') nesting.push_back(c);
            if (c == ')' || c == ']' || c == '}') {
                if (!nesting.empty()) nesting.pop_back();
            }
            push(Tok::Op, std::string(1, c), l, cc);
            advance(1);
            continue;
        }
        throw SyntaxError(std::string("unexpected character '") + c + "'", l, cc);
    }
    // end of input is reported just past the last token
    int end_line = 1, end_col = 1;
    for (auto it = out.rbegin(); it != out.rend(); ++it)
        if (it->kind != Tok::Newline) {
            end_line = it->line;
            end_col = it->column + static_cast<int>(it->text.size());
            break;
        }
    out.push_back({Tok::End, "", end_line, end_col});
    return out;
}

} // namespace tessera::interp
