// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "veriloop/sim/sim.hpp"
#include "veriloop/sim/trace.hpp"

namespace veriloop::pwm {

struct PwmConfig {
    uint32_t width = 8;
    uint32_t resolution = 256;  // must equal 2^width
    uint32_t dead = 4;          // dead-time cycles
    uint32_t phase = 85;        // counter value that enables the next phase

    /// Throws std::invalid_argument when the fields are inconsistent.
    void validate() const;
};

struct PwmInputs {
    bool rstn = true;  // active low
    bool en = true;
    uint32_t duty = 0;
};

struct PwmState {
    std::array<uint32_t, 3> c{};
    bool en2 = false;
    bool en3 = false;
    std::array<bool, 3> q{};
    std::array<uint32_t, 3> s{};  // dead-time shift registers, newest bit at 0

    bool operator==(const PwmState&) const = default;
};

struct PwmOutputs {
    std::array<bool, 3> pwm{};
    std::array<bool, 3> pwm_n{};

    /// Bit k holds phase k.
    uint32_t pwm_bits() const;
    uint32_t pwm_n_bits() const;
};

/// Outputs of `state` under `in`, without advancing the clock.
PwmOutputs pwm_outputs(const PwmState& state, const PwmInputs& in, const PwmConfig& config);

/// One rising clock edge: the next state, plus the outputs of the current one.
std::pair<PwmState, PwmOutputs> pwm_step(const PwmState& state, const PwmInputs& in, const PwmConfig& config);

using Schedule = std::map<size_t, uint32_t>;  // cycle -> value, held until the next entry

/// Trace of every state field and output (c1..c3, en2, en3, q1..q3, s1..s3,
/// pwm, pwm_n) sampled like the simulator: after the edge of each cycle. The
/// reset is asserted for cycles below `reset_cycles`. `enable` defaults to 1.
sim::Trace run_golden(const PwmConfig& config, const Schedule& duty, size_t reset_cycles, size_t cycles,
                      const Schedule& enable = {{0, 1}});

/// The duty sweep {0, 64, 128, 192}, one value per `segment` cycles.
Schedule duty_sweep(size_t segment = 512);

/// Simulator stimulus driving the top-level `duty` and `en` inputs the way
/// run_golden drives the model.
sim::Stimulus to_stimulus(const Schedule& duty, size_t reset_cycles, const Schedule& enable = {{0, 1}});

class TraceStructureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Mismatch {
    std::string signal;  // expected-side name
    size_t cycle = 0;    // first mismatching cycle
    uint64_t expected = 0;
    uint64_t actual = 0;
};

struct CompareReport {
    std::vector<Mismatch> mismatches;  // one per signal that differs
    size_t total = 0;                  // mismatching (signal, cycle) pairs

    bool empty() const { return mismatches.empty(); }
};

/// (expected name, actual name). A name may end in "[k]" to compare one bit.
using SignalMap = std::vector<std::pair<std::string, std::string>>;

/// Compares the mapped signals. Throws TraceStructureError when a mapped
/// signal is missing, the widths differ or the trace lengths differ.
CompareReport compare_traces(const sim::Trace& expected, const sim::Trace& actual, const SignalMap& map);

/// The six outputs bit by bit plus the three counters of the reference design.
SignalMap default_verify_map();

struct PeriodCounts {
    size_t high = 0;      // main output high
    size_t high_n = 0;    // complementary output high
    size_t both_low = 0;  // dead time
};

/// Counts over [from, from + period) of phase k in a trace with pwm/pwm_n buses.
PeriodCounts period_counts(const sim::Trace& trace, size_t k, size_t from, size_t period = 256);

/// Steady-state expectations: main high max(0, d - D), complementary high
/// max(0, (R - d) - D), evaluated from the configuration.
PeriodCounts expected_counts(const PwmConfig& config, uint32_t duty);

}  // namespace veriloop::pwm
