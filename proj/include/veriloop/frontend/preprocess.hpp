// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "veriloop/diagnostic.hpp"
#include "veriloop/frontend/ast.hpp"
#include "veriloop/frontend/token.hpp"

namespace veriloop::frontend {

inline constexpr int kMaxMacroDepth = 16;

struct PreprocessResult {
    TokenList tokens;
    std::vector<Diagnostic> diagnostics;
    MacroTable macros;  // injected defines plus every `define seen
};

/// Applies `define/`undef directives and substitutes object-like macro uses.
/// Undefined macros are reported once per use and kept as opaque tokens.
PreprocessResult preprocess(const TokenList& tokens, const MacroTable& defines = {});

/// Builds a define from `NAME=VALUE` command-line text (VALUE may be empty).
/// Returns false when NAME is not an identifier.
bool add_define(MacroTable& table, std::string_view assignment);

}  // namespace veriloop::frontend
