// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace veriloop::orchestrator {

struct Extraction {
    std::vector<std::string> units;  // source texts, in response order

    bool ok() const { return !units.empty(); }
};

/// Pulls Verilog out of a model response. Fenced blocks labeled verilog (or
/// unlabeled blocks that contain a module) win; otherwise every
/// module...endmodule span of the raw text is taken.
Extraction extract_code(std::string_view response);

/// Names of the modules a source text declares, by keyword scan.
std::vector<std::string> declared_modules(std::string_view text);

}  // namespace veriloop::orchestrator
