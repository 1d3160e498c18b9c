// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace veriloop::sim {

struct TraceSignal {
    std::string name;  // hierarchical, dot separated below the top module
    uint32_t width = 1;
    std::vector<uint64_t> values;  // one per cycle

    bool operator==(const TraceSignal&) const = default;
};

/// Per-cycle samples taken after settling, before the next clock edge.
struct Trace {
    size_t cycles = 0;
    std::vector<TraceSignal> signals;

    const TraceSignal* find(std::string_view name) const;
    TraceSignal* find(std::string_view name);
    bool operator==(const Trace&) const = default;
};

/// "cycle" column followed by one decimal column per signal.
std::string trace_to_csv(const Trace& trace);

inline uint64_t width_mask(uint32_t width) { return width >= 64 ? ~uint64_t{0} : (uint64_t{1} << width) - 1; }

}  // namespace veriloop::sim
