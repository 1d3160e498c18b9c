// SPDX-License-Identifier: Apache-2.0
#include "veriloop/frontend/preprocess.hpp"

#include <cctype>
#include <string>

#include "veriloop/frontend/lexer.hpp"

namespace veriloop::frontend {

namespace {

bool is_ident(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$')) return false;
    return true;
}

TokenList body_tokens(std::string_view text, const Span& where) {
    std::string joined;
    for (size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\\' && i + 1 < text.size() && (text[i + 1] == '\n' || text[i + 1] == '\r')) {
            joined.push_back(' ');
            ++i;
            if (i + 1 < text.size() && text[i] == '\r' && text[i + 1] == '\n') ++i;
            continue;
        }
        joined.push_back(text[i]);
    }
    LexResult lexed = tokenize(joined, where.file);
    TokenList out;
    for (auto& t : lexed.tokens) {
        if (t.kind == TokenKind::EndOfFile) break;
        t.span = where;
        out.push_back(std::move(t));
    }
    return out;
}

class Preprocessor {
public:
    explicit Preprocessor(const MacroTable& defines) { result_.macros = defines; }

    PreprocessResult run(const TokenList& tokens) {
        for (const auto& tok : tokens) {
            if (tok.kind == TokenKind::Directive) {
                directive(tok);
            } else if (tok.kind == TokenKind::MacroUse) {
                expand_use(tok, tok, 0);
            } else {
                result_.tokens.push_back(tok);
            }
        }
        return std::move(result_);
    }

private:
    PreprocessResult result_;
    bool depth_reported_ = false;

    void report(const Span& span, std::string code, Severity sev, std::string msg,
                std::string hint = {}) {
        Diagnostic d;
        d.code = std::move(code);
        d.severity = sev;
        d.span = span;
        d.message = std::move(msg);
        d.hint = std::move(hint);
        result_.diagnostics.push_back(std::move(d));
    }

    void directive(const Token& tok) {
        std::string_view text = tok.text;
        size_t p = 1;
        while (p < text.size() && (std::isalnum(static_cast<unsigned char>(text[p])) || text[p] == '_')) ++p;
        std::string_view name = text.substr(1, p - 1);
        std::string_view rest = text.substr(p);

        if (name == "define") {
            size_t q = 0;
            while (q < rest.size() && (rest[q] == ' ' || rest[q] == '\t')) ++q;
            size_t id_start = q;
            while (q < rest.size() && (std::isalnum(static_cast<unsigned char>(rest[q])) || rest[q] == '_' || rest[q] == '$')) ++q;
            std::string macro(rest.substr(id_start, q - id_start));
            if (!is_ident(macro)) {
                report(tok.span, "SYN000", Severity::Error, "`define without a macro name");
                return;
            }
            if (q < rest.size() && rest[q] == '(') {
                report(tok.span, "PRE003", Severity::Warning,
                       "function-like macro " + macro + " is not supported; definition ignored");
                return;
            }
            result_.macros[macro] = body_tokens(rest.substr(q), tok.span);
        } else if (name == "undef") {
            std::string macro(rest);
            while (!macro.empty() && std::isspace(static_cast<unsigned char>(macro.front()))) macro.erase(macro.begin());
            while (!macro.empty() && std::isspace(static_cast<unsigned char>(macro.back()))) macro.pop_back();
            result_.macros.erase(macro);
        } else if (name == "timescale" || name == "default_nettype" || name == "resetall" ||
                   name == "celldefine" || name == "endcelldefine") {
            // No effect on a two-state cycle model.
        } else {
            report(tok.span, "PRE003", Severity::Warning,
                   "unsupported directive `" + std::string(name) + " ignored");
        }
    }

    void expand_use(const Token& use, const Token& site, int depth) {
        std::string name(use.macro_name());
        auto it = result_.macros.find(name);
        if (it == result_.macros.end()) {
            report(site.span, "PRE001", Severity::Warning, "undefined macro " + name,
                   "define " + name + " with `define or pass --define " + name + "=VALUE");
            Token kept = use;
            kept.span = site.span;
            kept.leading_trivia = site.leading_trivia;
            kept.from_macro = depth > 0;
            result_.tokens.push_back(std::move(kept));
            return;
        }
        if (depth >= kMaxMacroDepth) {
            if (!depth_reported_) {
                report(site.span, "PRE002", Severity::Error,
                       "macro expansion of " + std::string(site.macro_name()) + " exceeds depth " +
                           std::to_string(kMaxMacroDepth),
                       "remove the recursive reference");
                depth_reported_ = true;
            }
            return;
        }
        // Copy: expansion may define nothing, but the table can't change mid-use.
        const TokenList body = it->second;
        bool first = true;
        for (const auto& bt : body) {
            if (bt.kind == TokenKind::MacroUse) {
                expand_use(bt, site, depth + 1);
                continue;
            }
            Token out = bt;
            out.span = site.span;
            out.from_macro = true;
            out.leading_trivia = first && depth == 0 ? site.leading_trivia : std::string(" ");
            first = false;
            result_.tokens.push_back(std::move(out));
        }
        if (depth == 0) depth_reported_ = false;
    }
};

}  // namespace

PreprocessResult preprocess(const TokenList& tokens, const MacroTable& defines) {
    return Preprocessor(defines).run(tokens);
}

bool add_define(MacroTable& table, std::string_view assignment) {
    size_t eq = assignment.find('=');
    std::string_view name = assignment.substr(0, eq);
    std::string_view value = eq == std::string_view::npos ? std::string_view() : assignment.substr(eq + 1);
    if (!is_ident(name)) return false;
    table[std::string(name)] = body_tokens(value, Span{});
    return true;
}

}  // namespace veriloop::frontend
