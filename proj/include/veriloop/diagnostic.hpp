// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace veriloop {

/// Location of a token or node in a source file. Offsets are byte offsets into
/// the file text; `start_line`/`start_col` locate `start` (1-based).
struct Span {
    uint32_t file = 0;
    uint32_t start = 0;
    uint32_t end = 0;
    uint32_t line = 1;
    uint32_t col = 1;
    uint32_t end_line = 1;
    uint32_t end_col = 1;

    static Span merge(const Span& a, const Span& b) {
        Span s = a;
        if (b.end > s.end) {
            s.end = b.end;
            s.end_line = b.end_line;
            s.end_col = b.end_col;
        }
        return s;
    }

    bool operator==(const Span&) const = default;
};

/// File id for findings that have no source location.
inline constexpr uint32_t kNoSourceFile = 0xFFFFFFFFu;
/// File id for findings produced by simulating a design.
inline constexpr uint32_t kSimulationFile = 0xFFFFFFFEu;
/// File id for findings about a generator response as a whole.
inline constexpr uint32_t kResponseFile = 0xFFFFFFFDu;

enum class Severity { Warning, Error };

std::string_view severity_name(Severity s);

struct Diagnostic {
    std::string code;
    Severity severity = Severity::Error;
    Span span;
    std::string message;
    std::string hint;
    std::vector<Span> related;

    bool is_error() const { return severity == Severity::Error; }
};

/// Orders by (file, start offset, rule code); stable for equal keys.
void sort_diagnostics(std::vector<Diagnostic>& diags);

bool has_errors(const std::vector<Diagnostic>& diags);

}  // namespace veriloop
