// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "veriloop/frontend/ast.hpp"

namespace veriloop::frontend {

using ParamEnv = std::map<std::string, uint64_t, std::less<>>;

/// Evaluates a constant expression over parameters, 64-bit unsigned.
std::optional<uint64_t> eval_const(const Expr& expr, const ParamEnv& env);

/// Bit width of an optional [msb:lsb] range; 1 when absent.
std::optional<uint32_t> range_width(const std::optional<Range>& range, const ParamEnv& env);

/// Parameter values of a module: header and body parameters in declaration
/// order, defaults evaluated in order, `overrides` replacing non-local ones.
ParamEnv module_params(const ModuleDecl& module, const ParamEnv& overrides = {});

using WidthTable = std::map<std::string, uint32_t, std::less<>>;

/// Widths of every port and net of a module under `env`. Unevaluable ranges
/// fall back to 1 bit.
WidthTable declared_widths(const ModuleDecl& module, const ParamEnv& env);

/// Self-determined bit width of an expression (IEEE 1364 sizing rules).
/// Parameters count as 32 bits, unknown names as 1.
uint32_t self_width(const Expr& expr, const WidthTable& widths, const ParamEnv& env);

}  // namespace veriloop::frontend
