// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "veriloop/frontend/ast.hpp"

namespace veriloop::hierarchy {

struct PortSpec {
    std::string name;
    frontend::Direction dir = frontend::Direction::Input;
    uint32_t width = 1;
};

struct InstanceSpec {
    std::string module;
    std::string instance;
};

struct ModuleSpec {
    std::string name;
    std::string description;
    std::vector<PortSpec> ports;
    std::vector<InstanceSpec> children;

    const PortSpec* find_port(std::string_view name) const;
};

struct ClockSpec {
    std::string name = "clk";
    std::optional<double> frequency_hz;  // accepted, not checked
};

struct ResetSpec {
    std::string name = "rstn";
    bool active_low = true;
    bool async = true;
};

struct DesignManifest {
    std::string top;
    ClockSpec clock;
    ResetSpec reset;
    std::vector<ModuleSpec> modules;

    const ModuleSpec* find(std::string_view name) const;
    /// Module names with children before parents; reachable-from-top first,
    /// then any unreachable modules, each group in declaration order.
    std::vector<std::string> topological_order() const;
};

class ManifestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses and validates a manifest. Throws ManifestError for malformed JSON
/// (with line and column) and for invariant violations (naming the offender).
DesignManifest load_manifest(std::string_view json_text);
DesignManifest load_manifest_file(const std::filesystem::path& path);

}  // namespace veriloop::hierarchy
