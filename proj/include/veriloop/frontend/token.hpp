// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "veriloop/diagnostic.hpp"

namespace veriloop::frontend {

enum class TokenKind {
    Identifier,
    SystemIdentifier,  // $display, $finish
    Keyword,
    SizedLiteral,
    UnsizedLiteral,
    StringLiteral,
    Operator,
    Punctuation,
    MacroUse,
    Directive,
    Unknown,
    EndOfFile,
};

std::string_view token_kind_name(TokenKind kind);

enum class NumberBase { Binary, Octal, Decimal, Hex };

/// Decoded value of a numeric literal. Bits that were written as x, z or ?
/// are zero in `value` and set in `xz_mask`.
struct LiteralValue {
    uint32_t width = 32;  // 32 for unsized literals
    bool sized = false;
    NumberBase base = NumberBase::Decimal;
    uint64_t value = 0;
    uint64_t xz_mask = 0;
    bool overflow = false;  // more than 64 significant bits

    bool operator==(const LiteralValue&) const = default;
};

struct Token {
    TokenKind kind = TokenKind::Unknown;
    std::string text;
    Span span;
    /// Whitespace and comments that precede this token in the source.
    std::string leading_trivia;
    LiteralValue literal;
    /// Set on tokens produced by macro expansion; span is the use site.
    bool from_macro = false;

    bool is(TokenKind k) const { return kind == k; }
    bool is(TokenKind k, std::string_view t) const { return kind == k && text == t; }
    bool is_keyword(std::string_view kw) const { return is(TokenKind::Keyword, kw); }
    bool is_op(std::string_view op) const {
        return (kind == TokenKind::Operator || kind == TokenKind::Punctuation) && text == op;
    }

    /// Macro-use tokens carry the leading backtick in `text`; this strips it.
    std::string_view macro_name() const {
        return kind == TokenKind::MacroUse ? std::string_view(text).substr(1) : std::string_view();
    }
};

using TokenList = std::vector<Token>;

bool is_keyword(std::string_view word);

}  // namespace veriloop::frontend
