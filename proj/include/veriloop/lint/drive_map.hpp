// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "veriloop/diagnostic.hpp"
#include "veriloop/frontend/ast.hpp"

namespace veriloop::lint {

enum class DriveKind { Blocking, Nonblocking, Continuous, PortConnection };
enum class ProcessKind { Always, Initial, Assign, NetInit, Instance };

std::string_view drive_kind_name(DriveKind k);

/// Inclusive bit interval [lo, hi] of a signal.
struct BitRange {
    uint32_t lo = 0;
    uint32_t hi = 0;

    bool overlaps(const BitRange& o) const { return lo <= o.hi && o.lo <= hi; }
    bool operator==(const BitRange&) const = default;
};

struct DriveSite {
    size_t process = 0;  // index into ModuleDrives::processes
    DriveKind kind = DriveKind::Blocking;
    std::optional<BitRange> bits;  // nullopt: whole signal, or a non-constant select
    Span span;                     // the assigned lvalue
};

struct Process {
    ProcessKind kind = ProcessKind::Always;
    Span span;
};

struct ModuleDrives {
    std::string module;
    std::vector<Process> processes;
    // Signal name to drive sites in source order.
    std::map<std::string, std::vector<DriveSite>> signals;
};

struct DriveMap {
    std::vector<ModuleDrives> modules;

    const ModuleDrives* find(std::string_view module) const;
};

/// Records every assignment lvalue once. Selects are recorded against the
/// base signal with the selected range; concatenation targets contribute one
/// site per element. Output connections of instances of modules found in
/// `asts` are recorded as PortConnection sites. Recovered statements are
/// skipped.
DriveMap build_drive_map(const std::vector<const frontend::Ast*>& asts);
DriveMap build_drive_map(const frontend::Ast& ast);

/// Whether two sites can write a common bit.
bool sites_overlap(const DriveSite& a, const DriveSite& b);

}  // namespace veriloop::lint
