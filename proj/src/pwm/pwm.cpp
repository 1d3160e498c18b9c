// SPDX-License-Identifier: Apache-2.0
#include "veriloop/pwm/pwm.hpp"

#include <algorithm>

namespace veriloop::pwm {

void PwmConfig::validate() const {
    if (width < 1 || width > 31) throw std::invalid_argument("counter width must be in 1..31");
    if (resolution != (uint32_t{1} << width)) throw std::invalid_argument("resolution must equal 2^width");
    if (phase == 0 || phase >= resolution) throw std::invalid_argument("phase threshold must be in 1..resolution-1");
    if (dead >= resolution) throw std::invalid_argument("dead time must be below the resolution");
    if (dead > 32) throw std::invalid_argument("dead time above 32 cycles is not supported");
}

uint32_t PwmOutputs::pwm_bits() const {
    return uint32_t{pwm[0]} | uint32_t{pwm[1]} << 1 | uint32_t{pwm[2]} << 2;
}

uint32_t PwmOutputs::pwm_n_bits() const {
    return uint32_t{pwm_n[0]} | uint32_t{pwm_n[1]} << 1 | uint32_t{pwm_n[2]} << 2;
}

namespace {

bool delayed_bit(uint32_t s, const PwmConfig& c) { return c.dead == 0 ? false : (s >> (c.dead - 1)) & 1; }

}  // namespace

PwmOutputs pwm_outputs(const PwmState& st, const PwmInputs& in, const PwmConfig& c) {
    PwmOutputs out;
    for (size_t k = 0; k < 3; ++k) {
        // With no dead time the shift register is absent and q drives both gates.
        bool delayed = c.dead == 0 ? st.q[k] : delayed_bit(st.s[k], c);
        out.pwm[k] = st.q[k] && delayed;
        out.pwm_n[k] = in.en && in.rstn && !st.q[k] && !delayed;
    }
    return out;
}

std::pair<PwmState, PwmOutputs> pwm_step(const PwmState& st, const PwmInputs& in, const PwmConfig& c) {
    // The reset is asynchronous, so the cleared state is already visible.
    if (!in.rstn) return {PwmState{}, pwm_outputs(PwmState{}, in, c)};
    PwmOutputs out = pwm_outputs(st, in, c);
    PwmState next = st;
    if (!in.en) {
        next.q = {false, false, false};
        next.s = {0, 0, 0};
        return {next, out};
    }
    uint32_t mod = c.resolution;
    uint64_t threshold = uint64_t{mod} - in.duty;  // width + 1 bits, so duty 0 never fires
    bool set2 = st.c[0] == c.phase;
    bool set3 = st.c[1] == c.phase;
    bool e2 = st.en2 || set2;
    bool e3 = st.en3 || set3;
    next.c[0] = (st.c[0] + 1) % mod;
    next.c[1] = e2 ? (st.c[1] + 1) % mod : 0;
    next.c[2] = e3 ? (st.c[2] + 1) % mod : 0;
    next.en2 = e2;
    next.en3 = e3;
    uint32_t smask = c.dead >= 32 ? ~uint32_t{0} : (uint32_t{1} << c.dead) - 1;
    for (size_t k = 0; k < 3; ++k) {
        next.q[k] = st.c[k] >= threshold;
        next.s[k] = ((st.s[k] << 1) | uint32_t{st.q[k]}) & smask;
    }
    return {next, out};
}

namespace {

uint32_t scheduled(const Schedule& s, size_t t, uint32_t fallback) {
    auto it = s.upper_bound(t);
    if (it == s.begin()) return fallback;
    return std::prev(it)->second;
}

}  // namespace

sim::Trace run_golden(const PwmConfig& config, const Schedule& duty, size_t reset_cycles, size_t cycles,
                      const Schedule& enable) {
    config.validate();
    if (duty.empty() || duty.begin()->first != 0) throw std::invalid_argument("duty schedule must start at cycle 0");
    for (const auto& [t, d] : duty)
        if (d >= config.resolution) throw std::invalid_argument("duty " + std::to_string(d) + " exceeds the resolution");

    sim::Trace tr;
    tr.cycles = cycles;
    const uint32_t w = config.width;
    const uint32_t dw = std::max<uint32_t>(1, config.dead);
    const std::vector<std::pair<std::string, uint32_t>> layout = {
        {"c1", w}, {"c2", w}, {"c3", w}, {"en2", 1}, {"en3", 1}, {"q1", 1}, {"q2", 1},
        {"q3", 1}, {"s1", dw}, {"s2", dw}, {"s3", dw}, {"pwm", 3}, {"pwm_n", 3}};
    for (const auto& [name, width] : layout) {
        tr.signals.push_back({name, width, {}});
        tr.signals.back().values.reserve(cycles);
    }
    PwmState st;
    for (size_t t = 0; t < cycles; ++t) {
        PwmInputs in;
        in.rstn = t >= reset_cycles;
        in.en = scheduled(enable, t, 1) != 0;
        in.duty = scheduled(duty, t, 0);
        st = pwm_step(st, in, config).first;
        PwmOutputs out = pwm_outputs(st, in, config);
        const uint64_t row[] = {st.c[0], st.c[1], st.c[2], st.en2, st.en3, st.q[0], st.q[1],
                                st.q[2], st.s[0], st.s[1], st.s[2], out.pwm_bits(), out.pwm_n_bits()};
        for (size_t k = 0; k < layout.size(); ++k) tr.signals[k].values.push_back(row[k]);
    }
    return tr;
}

Schedule duty_sweep(size_t segment) {
    return {{0, 0}, {segment, 64}, {2 * segment, 128}, {3 * segment, 192}};
}

sim::Stimulus to_stimulus(const Schedule& duty, size_t reset_cycles, const Schedule& enable) {
    sim::Stimulus s;
    s.reset_cycles = reset_cycles;
    if (enable.empty() || enable.begin()->first != 0) s.writes.push_back({"en", 0, 1});
    for (const auto& [t, v] : enable) s.writes.push_back({"en", t, v});
    for (const auto& [t, v] : duty) s.writes.push_back({"duty", t, v});
    return s;
}

namespace {

struct Ref {
    const sim::TraceSignal* sig = nullptr;
    int bit = -1;
};

Ref resolve(const sim::Trace& t, const std::string& name, const char* side) {
    Ref r;
    std::string base = name;
    if (!name.empty() && name.back() == ']') {
        auto open = name.rfind('[');
        if (open == std::string::npos) throw TraceStructureError("malformed signal reference '" + name + "'");
        base = name.substr(0, open);
        r.bit = std::stoi(name.substr(open + 1, name.size() - open - 2));
    }
    r.sig = t.find(base);
    if (!r.sig) throw TraceStructureError(std::string(side) + " trace has no signal '" + base + "'");
    if (r.bit >= 0 && static_cast<uint32_t>(r.bit) >= r.sig->width)
        throw TraceStructureError("bit " + std::to_string(r.bit) + " is outside '" + base + "'");
    return r;
}

uint64_t sample(const Ref& r, size_t t) {
    uint64_t v = r.sig->values[t];
    return r.bit < 0 ? v : (v >> r.bit) & 1;
}

uint32_t ref_width(const Ref& r) { return r.bit < 0 ? r.sig->width : 1; }

}  // namespace

CompareReport compare_traces(const sim::Trace& expected, const sim::Trace& actual, const SignalMap& map) {
    if (expected.cycles != actual.cycles)
        throw TraceStructureError("trace lengths differ: " + std::to_string(expected.cycles) + " vs " +
                                  std::to_string(actual.cycles));
    CompareReport rep;
    for (const auto& [ename, aname] : map) {
        Ref e = resolve(expected, ename, "expected");
        Ref a = resolve(actual, aname, "actual");
        if (ref_width(e) != ref_width(a))
            throw TraceStructureError("width of '" + ename + "' (" + std::to_string(ref_width(e)) + ") differs from '" +
                                      aname + "' (" + std::to_string(ref_width(a)) + ")");
        if (e.sig->values.size() != expected.cycles || a.sig->values.size() != actual.cycles)
            throw TraceStructureError("signal '" + ename + "' does not cover every cycle");
        bool first = true;
        for (size_t t = 0; t < expected.cycles; ++t) {
            uint64_t ev = sample(e, t), av = sample(a, t);
            if (ev == av) continue;
            ++rep.total;
            if (first) {
                rep.mismatches.push_back({ename, t, ev, av});
                first = false;
            }
        }
    }
    return rep;
}

SignalMap default_verify_map() {
    SignalMap m;
    for (int k = 0; k < 3; ++k) m.emplace_back("pwm[" + std::to_string(k) + "]", "pwm[" + std::to_string(k) + "]");
    for (int k = 0; k < 3; ++k) m.emplace_back("pwm_n[" + std::to_string(k) + "]", "pwm_n[" + std::to_string(k) + "]");
    m.emplace_back("c1", "u_cnt1.count");
    m.emplace_back("c2", "u_cnt2.count");
    m.emplace_back("c3", "u_cnt3.count");
    return m;
}

PeriodCounts period_counts(const sim::Trace& trace, size_t k, size_t from, size_t period) {
    const sim::TraceSignal* p = trace.find("pwm");
    const sim::TraceSignal* n = trace.find("pwm_n");
    if (!p || !n) throw TraceStructureError("trace lacks pwm/pwm_n");
    if (from + period > trace.cycles) throw TraceStructureError("window exceeds the trace");
    PeriodCounts c;
    for (size_t t = from; t < from + period; ++t) {
        bool hi = (p->values[t] >> k) & 1, lo = (n->values[t] >> k) & 1;
        c.high += hi;
        c.high_n += lo;
        c.both_low += !hi && !lo;
    }
    return c;
}

PeriodCounts expected_counts(const PwmConfig& config, uint32_t duty) {
    PeriodCounts c;
    int64_t d = duty, dead = config.dead, res = config.resolution;
    c.high = static_cast<size_t>(std::max<int64_t>(0, d - dead));
    c.high_n = static_cast<size_t>(std::max<int64_t>(0, (res - d) - dead));
    c.both_low = static_cast<size_t>(res) - c.high - c.high_n;
    return c;
}

}  // namespace veriloop::pwm
