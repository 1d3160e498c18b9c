// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

#include "veriloop/frontend/ast.hpp"

namespace veriloop::frontend {

class PrintError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Emits normalized Verilog. Throws PrintError for trees that went through
/// error recovery.
std::string pretty_print(const Ast& ast);
std::string pretty_print(const ModuleDecl& module);
std::string to_string(const Expr& expr);

}  // namespace veriloop::frontend
