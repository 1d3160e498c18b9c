// SPDX-License-Identifier: Apache-2.0
#include "veriloop/sim/trace.hpp"

#include <sstream>

namespace veriloop::sim {

const TraceSignal* Trace::find(std::string_view name) const {
    for (const auto& s : signals)
        if (s.name == name) return &s;
    return nullptr;
}

TraceSignal* Trace::find(std::string_view name) {
    for (auto& s : signals)
        if (s.name == name) return &s;
    return nullptr;
}

std::string trace_to_csv(const Trace& trace) {
    std::ostringstream os;
    os << "cycle";
    for (const auto& s : trace.signals) os << ',' << s.name;
    os << '\n';
    for (size_t t = 0; t < trace.cycles; ++t) {
        os << t;
        for (const auto& s : trace.signals) os << ',' << (t < s.values.size() ? s.values[t] : 0);
        os << '\n';
    }
    return os.str();
}

}  // namespace veriloop::sim
