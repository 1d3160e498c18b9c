// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "veriloop/sim/trace.hpp"

namespace veriloop::sim {

class VcdError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Value-change dump with a 1ns timescale and one timestamp per cycle. Dotted
/// signal names become nested scopes under `top`. A closing timestamp equal to
/// the cycle count marks the end of the trace.
std::string write_vcd(const Trace& trace, std::string_view top = "top");

/// Reads a VCD back into a trace. Names are relative to the outermost scope;
/// x and z bits read as 0.
Trace read_vcd(std::string_view text);

}  // namespace veriloop::sim
