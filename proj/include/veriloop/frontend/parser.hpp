// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>
#include <vector>

#include "veriloop/diagnostic.hpp"
#include "veriloop/frontend/ast.hpp"
#include "veriloop/frontend/token.hpp"

namespace veriloop::frontend {

inline constexpr size_t kDiagnosticFloodLimit = 10000;

struct ParseResult {
    Ast ast;
    std::vector<Diagnostic> diagnostics;
    MacroTable macros;

    bool ok() const { return !has_errors(diagnostics); }
};

/// Parses a preprocessed token stream. Malformed regions are skipped with
/// panic-mode recovery and reported as SYN000; identifier references that do
/// not resolve inside their module are reported as SEM001.
ParseResult parse(const TokenList& tokens, uint32_t file_id = 0);

/// tokenize + preprocess + parse, with diagnostics of all three phases.
ParseResult parse_source(std::string_view text, uint32_t file_id = 0,
                         const MacroTable& defines = {});

}  // namespace veriloop::frontend
