// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>
#include <vector>

#include "veriloop/diagnostic.hpp"
#include "veriloop/frontend/parser.hpp"
#include "veriloop/hierarchy/manifest.hpp"

namespace veriloop::hierarchy {

/// Span file id of findings about a module missing entirely.
inline constexpr uint32_t kManifestFile = kNoSourceFile;

struct HierConfig {
    bool undeclared_is_error = false;  // promote HC004
};

struct HierReport {
    std::vector<Diagnostic> diagnostics;

    bool pass() const { return !has_errors(diagnostics); }
};

/// Checks every manifest module against the parsed sources. Modules whose
/// source contains an error diagnostic are treated as absent.
HierReport check(const DesignManifest& manifest, const std::vector<const frontend::ParseResult*>& files,
                 const HierConfig& config = {});

/// Checks a single manifest module; other source modules that the manifest
/// does not declare still produce HC004.
HierReport check_module(const DesignManifest& manifest, std::string_view module,
                        const std::vector<const frontend::ParseResult*>& files, const HierConfig& config = {});

}  // namespace veriloop::hierarchy
