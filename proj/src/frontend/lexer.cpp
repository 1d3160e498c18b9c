// SPDX-License-Identifier: Apache-2.0
#include "veriloop/frontend/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>
#include <string>

namespace veriloop::frontend {

namespace {

const std::set<std::string, std::less<>>& keyword_set() {
    static const std::set<std::string, std::less<>> kw = {
        "always",   "assign",     "begin",    "case",      "casex",       "casez",
        "default",  "else",       "end",      "endcase",   "endfunction", "endgenerate",
        "endmodule", "endtask",   "for",      "forever",   "function",    "generate",
        "genvar",   "if",         "initial",  "inout",     "input",       "integer",
        "localparam", "module",   "negedge",  "or",        "output",      "parameter",
        "posedge",  "reg",        "repeat",   "signed",    "supply0",     "supply1",
        "task",     "tri",        "while",    "wire",
    };
    return kw;
}

const std::set<std::string, std::less<>>& directive_set() {
    static const std::set<std::string, std::less<>> d = {
        "define", "undef",    "timescale",       "include",     "ifdef",      "ifndef",
        "else",   "elsif",    "endif",           "default_nettype", "resetall", "celldefine",
        "endcelldefine",
    };
    return d;
}

// Longest first.
constexpr std::array<std::string_view, 32> kOperators = {
    "<<<", ">>>", "===", "!==", "<<", ">>", "<=", ">=", "==", "!=", "&&",
    "||",  "~&",  "~|",  "~^",  "^~", "**", "+",  "-",  "*",  "/",  "%",
    "!",   "~",   "&",   "|",   "^",  "<",  ">",  "=",  "?",  ":",
};

constexpr std::string_view kPunctuation = "()[]{};,.#@";

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_base_char(char c) {
    switch (c) {
    case 'b': case 'B': case 'o': case 'O': case 'd': case 'D': case 'h': case 'H':
        return true;
    default:
        return false;
    }
}

class Lexer {
public:
    Lexer(std::string_view src, uint32_t file) : src_(src), file_(file) {}

    LexResult run() {
        LexResult out;
        while (true) {
            size_t trivia_start = pos_;
            skip_trivia(out);
            std::string trivia(src_.substr(trivia_start, pos_ - trivia_start));
            Token tok;
            if (pos_ >= src_.size()) {
                tok.kind = TokenKind::EndOfFile;
                tok.span = make_span(pos_, line_, col_);
                tok.leading_trivia = std::move(trivia);
                out.tokens.push_back(std::move(tok));
                break;
            }
            tok = next_token(out);
            tok.leading_trivia = std::move(trivia);
            out.tokens.push_back(std::move(tok));
        }
        return out;
    }

private:
    std::string_view src_;
    uint32_t file_;
    size_t pos_ = 0;
    uint32_t line_ = 1;
    uint32_t col_ = 1;

    char peek(size_t ahead = 0) const {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }

    void advance() {
        if (pos_ >= src_.size()) return;
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else if ((static_cast<unsigned char>(src_[pos_]) & 0xC0) != 0x80) {
            ++col_;  // count code points, not continuation bytes
        }
        ++pos_;
    }

    void advance_to(size_t target) {
        while (pos_ < target) advance();
    }

    Span make_span(size_t start, uint32_t line, uint32_t col) const {
        Span s;
        s.file = file_;
        s.start = static_cast<uint32_t>(start);
        s.end = static_cast<uint32_t>(pos_);
        s.line = line;
        s.col = col;
        s.end_line = line_;
        s.end_col = col_;
        return s;
    }

    void error(LexResult& out, const Span& span, std::string msg) {
        Diagnostic d;
        d.code = "SYN000";
        d.severity = Severity::Error;
        d.span = span;
        d.message = std::move(msg);
        out.diagnostics.push_back(std::move(d));
    }

    void skip_trivia(LexResult& out) {
        while (pos_ < src_.size()) {
            char c = peek();
            if (is_space(c)) {
                advance();
            } else if (c == '/' && peek(1) == '/') {
                while (pos_ < src_.size() && peek() != '\n') advance();
            } else if (c == '/' && peek(1) == '*') {
                size_t start = pos_;
                uint32_t line = line_, col = col_;
                advance();
                advance();
                size_t close = src_.find("*/", pos_);
                if (close == std::string_view::npos) {
                    advance_to(src_.size());
                    Span s = make_span(start, line, col);
                    error(out, s, "unterminated block comment");
                } else {
                    advance_to(close + 2);
                }
            } else {
                break;
            }
        }
    }

    Token next_token(LexResult& out) {
        size_t start = pos_;
        uint32_t line = line_, col = col_;
        Token tok;
        char c = peek();

        auto finish = [&](TokenKind kind) {
            tok.kind = kind;
            tok.text = std::string(src_.substr(start, pos_ - start));
            tok.span = make_span(start, line, col);
            return tok;
        };

        if (ident_start(c)) {
            while (ident_char(peek())) advance();
            std::string_view word = src_.substr(start, pos_ - start);
            return finish(is_keyword(word) ? TokenKind::Keyword : TokenKind::Identifier);
        }
        if (c == '\\') {
            advance();
            while (pos_ < src_.size() && !is_space(peek())) advance();
            return finish(TokenKind::Identifier);
        }
        if (c == '$') {
            advance();
            while (ident_char(peek())) advance();
            if (pos_ - start == 1) {
                finish(TokenKind::Unknown);
                error(out, tok.span, "unexpected character '$'");
                return tok;
            }
            return finish(TokenKind::SystemIdentifier);
        }
        if (c == '`') {
            advance();
            while (ident_char(peek())) advance();
            std::string_view name = src_.substr(start + 1, pos_ - start - 1);
            if (name.empty()) {
                finish(TokenKind::Unknown);
                error(out, tok.span, "stray '`'");
                return tok;
            }
            if (directive_set().count(name)) {
                lex_directive_body();
                return finish(TokenKind::Directive);
            }
            return finish(TokenKind::MacroUse);
        }
        if (is_digit(c) || (c == '\'' && is_based_literal_at(pos_))) {
            return lex_number(out, start, line, col);
        }
        if (c == '"') {
            advance();
            bool closed = false;
            while (pos_ < src_.size() && peek() != '\n') {
                if (peek() == '\\') {
                    advance();
                    if (pos_ < src_.size() && peek() != '\n') advance();
                    continue;
                }
                if (peek() == '"') {
                    advance();
                    closed = true;
                    break;
                }
                advance();
            }
            finish(TokenKind::StringLiteral);
            if (!closed) error(out, tok.span, "unterminated string literal");
            return tok;
        }
        for (std::string_view op : kOperators) {
            if (src_.substr(pos_, op.size()) == op) {
                advance_to(pos_ + op.size());
                return finish(TokenKind::Operator);
            }
        }
        if (kPunctuation.find(c) != std::string_view::npos) {
            advance();
            return finish(TokenKind::Punctuation);
        }

        // Unknown byte; swallow a whole UTF-8 sequence so columns stay sane.
        advance();
        while (pos_ < src_.size() && (static_cast<unsigned char>(peek()) & 0xC0) == 0x80) advance();
        finish(TokenKind::Unknown);
        error(out, tok.span, "unexpected character '" + tok.text + "'");
        return tok;
    }

    // Directive text runs to end of line, honoring backslash continuations and
    // stopping before a trailing // comment.
    void lex_directive_body() {
        while (pos_ < src_.size()) {
            char c = peek();
            if (c == '\n') break;
            if (c == '\\' && peek(1) == '\n') {
                advance();
                advance();
                continue;
            }
            if (c == '\\' && peek(1) == '\r' && peek(2) == '\n') {
                advance();
                advance();
                advance();
                continue;
            }
            if (c == '/' && (peek(1) == '/' || peek(1) == '*')) break;
            if (c == '\r' && peek(1) == '\n') break;
            advance();
        }
        // Trailing blanks belong to trivia.
        size_t end = pos_;
        while (end > 0 && (src_[end - 1] == ' ' || src_[end - 1] == '\t')) --end;
        if (end < pos_) rewind_to(end);
    }

    void rewind_to(size_t target) {
        // Only used to give back horizontal blanks on the same line.
        col_ -= static_cast<uint32_t>(pos_ - target);
        pos_ = target;
    }

    bool is_based_literal_at(size_t p) const {
        // '[sS]?[bodhBODH]
        if (p >= src_.size() || src_[p] != '\'') return false;
        size_t q = p + 1;
        if (q < src_.size() && (src_[q] == 's' || src_[q] == 'S')) ++q;
        return q < src_.size() && is_base_char(src_[q]);
    }

    Token lex_number(LexResult& out, size_t start, uint32_t line, uint32_t col) {
        Token tok;
        bool based = false;
        if (is_digit(peek())) {
            while (is_digit(peek()) || peek() == '_') advance();
            // Optional blanks between size and the base tick.
            size_t look = pos_;
            while (look < src_.size() && (src_[look] == ' ' || src_[look] == '\t')) ++look;
            if (is_based_literal_at(look)) {
                advance_to(look);
                based = true;
            }
        } else {
            based = true;
        }
        bool sized = based && src_[start] != '\'';
        if (based) {
            advance();  // tick
            if (peek() == 's' || peek() == 'S') advance();
            advance();  // base
            while (std::isxdigit(static_cast<unsigned char>(peek())) || peek() == '_' ||
                   peek() == 'x' || peek() == 'X' || peek() == 'z' || peek() == 'Z' || peek() == '?') {
                advance();
            }
        }
        tok.kind = sized ? TokenKind::SizedLiteral : TokenKind::UnsizedLiteral;
        tok.text = std::string(src_.substr(start, pos_ - start));
        tok.span = make_span(start, line, col);
        if (!decode_literal(tok.text, tok.literal)) {
            error(out, tok.span, "malformed number literal '" + tok.text + "'");
        } else if (tok.literal.overflow) {
            error(out, tok.span, "literal '" + tok.text + "' exceeds 64 bits");
        }
        return tok;
    }
};

uint64_t width_mask(uint32_t width) {
    return width >= 64 ? ~uint64_t{0} : ((uint64_t{1} << width) - 1);
}

}  // namespace

std::string_view token_kind_name(TokenKind kind) {
    switch (kind) {
    case TokenKind::Identifier: return "identifier";
    case TokenKind::SystemIdentifier: return "system identifier";
    case TokenKind::Keyword: return "keyword";
    case TokenKind::SizedLiteral: return "sized literal";
    case TokenKind::UnsizedLiteral: return "unsized literal";
    case TokenKind::StringLiteral: return "string";
    case TokenKind::Operator: return "operator";
    case TokenKind::Punctuation: return "punctuation";
    case TokenKind::MacroUse: return "macro use";
    case TokenKind::Directive: return "directive";
    case TokenKind::Unknown: return "unknown";
    case TokenKind::EndOfFile: return "end of file";
    }
    return "?";
}

bool is_keyword(std::string_view word) { return keyword_set().count(word) != 0; }

bool decode_literal(std::string_view text, LiteralValue& out) {
    std::string clean;
    for (char c : text)
        if (c != '_' && c != ' ' && c != '\t') clean.push_back(c);
    out = LiteralValue{};
    size_t tick = clean.find('\'');
    if (tick == std::string::npos) {
        if (clean.empty()) return false;
        out.sized = false;
        out.width = 32;
        out.base = NumberBase::Decimal;
        for (char c : clean) {
            if (!is_digit(c)) return false;
            uint64_t next = out.value * 10 + static_cast<uint64_t>(c - '0');
            if (out.value > (~uint64_t{0} - 9) / 10) out.overflow = true;
            out.value = next;
        }
        return true;
    }

    if (tick > 0) {
        out.sized = true;
        uint64_t w = 0;
        for (size_t i = 0; i < tick; ++i) {
            if (!is_digit(clean[i])) return false;
            w = w * 10 + static_cast<uint64_t>(clean[i] - '0');
            if (w > 1u << 20) return false;
        }
        if (w == 0) return false;
        out.width = static_cast<uint32_t>(w);
    }
    size_t p = tick + 1;
    if (p < clean.size() && (clean[p] == 's' || clean[p] == 'S')) ++p;
    if (p >= clean.size()) return false;
    unsigned bits_per_digit = 0;
    switch (std::tolower(static_cast<unsigned char>(clean[p]))) {
    case 'b': out.base = NumberBase::Binary; bits_per_digit = 1; break;
    case 'o': out.base = NumberBase::Octal; bits_per_digit = 3; break;
    case 'h': out.base = NumberBase::Hex; bits_per_digit = 4; break;
    case 'd': out.base = NumberBase::Decimal; break;
    default: return false;
    }
    std::string_view digits = std::string_view(clean).substr(p + 1);
    if (digits.empty()) return false;

    auto is_xz = [](char c) { return c == 'x' || c == 'X' || c == 'z' || c == 'Z' || c == '?'; };

    if (out.base == NumberBase::Decimal) {
        if (digits.size() == 1 && is_xz(digits[0])) {
            out.xz_mask = width_mask(out.width);
            return true;
        }
        for (char c : digits) {
            if (!is_digit(c)) return false;
            if (out.value > (~uint64_t{0} - 9) / 10) out.overflow = true;
            out.value = out.value * 10 + static_cast<uint64_t>(c - '0');
        }
    } else {
        unsigned total_bits = 0;
        for (char c : digits) {
            uint64_t d = 0;
            bool xz = false;
            if (is_xz(c)) {
                xz = true;
            } else if (std::isxdigit(static_cast<unsigned char>(c))) {
                d = static_cast<uint64_t>(std::isdigit(static_cast<unsigned char>(c))
                                              ? c - '0'
                                              : std::tolower(static_cast<unsigned char>(c)) - 'a' + 10);
                if (d >= (uint64_t{1} << bits_per_digit)) return false;
            } else {
                return false;
            }
            if (total_bits + bits_per_digit > 64 && (out.value >> (64 - bits_per_digit)) != 0)
                out.overflow = true;
            out.value = (out.value << bits_per_digit) | d;
            out.xz_mask = (out.xz_mask << bits_per_digit) |
                          (xz ? (uint64_t{1} << bits_per_digit) - 1 : 0);
            total_bits += bits_per_digit;
        }
        // A leading x/z digit extends to the full width.
        if (is_xz(digits[0]) && out.width > total_bits && total_bits < 64)
            out.xz_mask |= width_mask(out.width) & ~width_mask(total_bits);
    }
    if (out.width < 64) {
        // Sized literals wider than their digits are zero-extended; narrower
        // ones are truncated.
        if (out.sized && (out.value & ~width_mask(out.width)) != 0) out.value &= width_mask(out.width);
        out.xz_mask &= width_mask(out.width);
    }
    return true;
}

LexResult tokenize(std::string_view source, uint32_t file_id) {
    return Lexer(source, file_id).run();
}

}  // namespace veriloop::frontend
