// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>
#include <vector>

#include "veriloop/diagnostic.hpp"
#include "veriloop/frontend/token.hpp"

namespace veriloop::frontend {

struct LexResult {
    TokenList tokens;  // always terminated by an EndOfFile token
    std::vector<Diagnostic> diagnostics;
};

/// Splits `source` into tokens. Total: malformed input becomes Unknown tokens
/// plus diagnostics. Concatenating every token's leading trivia and text
/// reproduces `source` exactly.
LexResult tokenize(std::string_view source, uint32_t file_id = 0);

/// Decodes the text of a sized or unsized numeric literal. Returns false when
/// the text is not a well-formed literal.
bool decode_literal(std::string_view text, LiteralValue& out);

}  // namespace veriloop::frontend
