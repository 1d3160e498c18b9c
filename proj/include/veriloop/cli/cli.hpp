// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>

namespace veriloop::cli {

enum ExitCode : int {
    kExitClean = 0,
    kExitFindings = 1,  // diagnostics, mismatches or a non-converged session
    kExitUsage = 2,     // usage, I/O or configuration error
    kExitInternal = 3,
};

/// Entry point of the `veriloop` tool, with injectable streams for tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace veriloop::cli
