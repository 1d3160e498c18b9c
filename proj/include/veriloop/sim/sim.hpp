// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "veriloop/diagnostic.hpp"
#include "veriloop/frontend/ast.hpp"
#include "veriloop/sim/trace.hpp"

namespace veriloop::sim {

class SimError : public std::runtime_error {
public:
    explicit SimError(const std::string& msg, std::optional<Span> where = std::nullopt)
        : std::runtime_error(msg), span(where) {}
    std::optional<Span> span;
};

/// Bad stimulus, cycle count or record list: the caller's input, not the design.
class StimulusError : public SimError {
public:
    using SimError::SimError;
};

enum class SignalKind { Input, Comb, State };

struct SignalInfo {
    std::string name;  // hierarchical, e.g. "u_cnt1.count"
    uint32_t width = 1;
    SignalKind kind = SignalKind::Comb;
    uint32_t slot = 0;  // storage shared by port-connected names
};

struct ProcessInfo {
    std::string instance;  // hierarchical instance path, empty for the top
    std::string module;
    Span span;
    bool edge = false;
    std::string clock;              // edge processes only
    std::optional<std::string> reset;  // asynchronous reset signal, if any
};

struct ElabOptions {
    std::string clock = "clk";
    std::string reset = "rstn";
    bool reset_active_low = true;
};

namespace detail {
struct Program;
}

/// A flattened design ready to simulate. Immutable; runs may share it.
struct ElaboratedDesign {
    std::string top;
    std::vector<std::string> ports;  // top-level ports in declaration order
    std::vector<SignalInfo> signals;
    std::vector<ProcessInfo> comb_processes;  // in evaluation order
    std::vector<ProcessInfo> edge_processes;
    std::vector<Diagnostic> warnings;  // SIM002: constructs the simulator ignores
    ElabOptions options;
    std::shared_ptr<const detail::Program> program;

    const SignalInfo* find(std::string_view name) const;
};

/// Throws SimError for unresolved instantiations, combinational cycles (the
/// message lists the signals), multiple clocks and unsupported constructs.
ElaboratedDesign elaborate(const std::vector<const frontend::Ast*>& asts, std::string_view top,
                           const ElabOptions& options = {});

struct StimulusWrite {
    std::string signal;
    size_t cycle = 0;
    uint64_t value = 0;
};

struct Stimulus {
    size_t reset_cycles = 4;
    std::vector<StimulusWrite> writes;
};

/// {"reset_cycles": 4, "writes": [{"signal":"duty","cycle":0,"value":64}]}
Stimulus load_stimulus(std::string_view json_text);

/// Simulates `cycles` clock cycles. An empty `record` list records every
/// named signal. Throws SimError on precondition violations and on
/// "combinational instability".
Trace run(const ElaboratedDesign& design, const Stimulus& stimulus, size_t cycles,
          const std::vector<std::string>& record = {});

}  // namespace veriloop::sim
