// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "veriloop/diagnostic.hpp"
#include "veriloop/frontend/ast.hpp"
#include "veriloop/frontend/parser.hpp"
#include "veriloop/frontend/source.hpp"
#include "veriloop/lint/drive_map.hpp"

namespace veriloop::lint {

struct RuleInfo {
    std::string_view code;
    std::string_view name;
    Severity default_severity;
};

/// The configurable rules, in code order.
const std::vector<RuleInfo>& rules();
const RuleInfo* find_rule(std::string_view code);

struct RuleSetting {
    bool enabled = true;
    std::optional<Severity> severity;
};

struct LintConfig {
    std::map<std::string, RuleSetting, std::less<>> rules;
    bool deny_warnings = false;
    /// Same-process re-assignment (default-then-override) reporting for LLM003.
    bool intra_process_multi_drive = false;

    /// Applies "off", "warn" or "error" to `code`. Returns false for any
    /// other level. Unknown codes are kept so unknown_codes() can report them.
    bool set(std::string_view code, std::string_view level);
    bool enabled(std::string_view code) const;
    std::vector<std::string> unknown_codes() const;
};

std::vector<Diagnostic> lint(const std::vector<const frontend::Ast*>& asts, const DriveMap& drives,
                             const LintConfig& config);
std::vector<Diagnostic> lint(const frontend::Ast& ast, const DriveMap& drives, const LintConfig& config);

/// Combines parse-phase and lint diagnostics into one ordered list. SYN000
/// entries that LLM001/LLM002 re-tagged are dropped; deny-warnings promotes
/// the remaining warnings.
std::vector<Diagnostic> merge_diagnostics(std::vector<Diagnostic> parse_diags,
                                          std::vector<Diagnostic> lint_diags, const LintConfig& config);

enum class Format { Text, Json };

/// Display name of a span's file: the source name or one of "<manifest>",
/// "<simulation>", "<response>" and "<input>".
std::string source_name(uint32_t file, const SourceManager& sources);

/// Text: one "file:line:col: severity[CODE] message" line per diagnostic.
/// Json: array of {rule, severity, file, start, end, message, hint, related}.
std::string render_diagnostics(const std::vector<Diagnostic>& diags, Format format, const SourceManager& sources);

/// Parse results of every file of a design plus the merged diagnostics.
struct Analysis {
    std::vector<frontend::ParseResult> files;  // indexed by file id
    std::vector<Diagnostic> diagnostics;

    std::vector<const frontend::Ast*> asts() const;
};

Analysis analyze(const SourceManager& sources, const frontend::MacroTable& defines, const LintConfig& config);

}  // namespace veriloop::lint
