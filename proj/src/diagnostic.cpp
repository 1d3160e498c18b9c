// SPDX-License-Identifier: Apache-2.0
#include "veriloop/diagnostic.hpp"

#include <algorithm>
#include <tuple>

namespace veriloop {

std::string_view severity_name(Severity s) {
    return s == Severity::Error ? "error" : "warning";
}

void sort_diagnostics(std::vector<Diagnostic>& diags) {
    std::stable_sort(diags.begin(), diags.end(), [](const Diagnostic& a, const Diagnostic& b) {
        return std::tie(a.span.file, a.span.start, a.code) <
               std::tie(b.span.file, b.span.start, b.code);
    });
}

bool has_errors(const std::vector<Diagnostic>& diags) {
    return std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) { return d.is_error(); });
}

}  // namespace veriloop
