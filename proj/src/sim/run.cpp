// SPDX-License-Identifier: Apache-2.0
#include <algorithm>

#include "json.hpp"
#include "program.hpp"
#include "veriloop/sim/sim.hpp"

namespace veriloop::sim {

using detail::LvalPart;
using detail::Node;
using detail::Op;
using detail::Process;
using detail::Program;
using detail::SOp;
using detail::Stmt;

Stimulus load_stimulus(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw StimulusError(std::string("stimulus is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw StimulusError("stimulus must be a JSON object");
    Stimulus s;
    if (doc.contains("reset_cycles")) {
        if (!doc["reset_cycles"].is_number_unsigned()) throw StimulusError("reset_cycles must be a non-negative integer");
        s.reset_cycles = doc["reset_cycles"].get<size_t>();
    }
    if (doc.contains("writes")) {
        if (!doc["writes"].is_array()) throw StimulusError("writes must be an array");
        for (const auto& w : doc["writes"]) {
            if (!w.is_object() || !w.contains("signal") || !w["signal"].is_string() || !w.contains("cycle") ||
                !w["cycle"].is_number_unsigned() || !w.contains("value") || !w["value"].is_number_unsigned())
                throw StimulusError("each write needs a string signal and unsigned cycle and value");
            s.writes.push_back({w["signal"].get<std::string>(), w["cycle"].get<size_t>(), w["value"].get<uint64_t>()});
        }
    }
    return s;
}

namespace {

inline uint64_t shl(uint64_t v, uint64_t n) { return n >= 64 ? 0 : v << n; }
inline uint64_t shr(uint64_t v, uint64_t n) { return n >= 64 ? 0 : v >> n; }

class Machine {
public:
    explicit Machine(const Program& p) : prog_(p), vals_(p.slot_count, 0) {}

    std::vector<uint64_t>& values() { return vals_; }

    void settle() {
        for (int sweep = 0; sweep < 1000; ++sweep) {
            bool changed = false;
            for (const Process& p : prog_.comb) {
                before_.clear();
                for (uint32_t s : p.write_slots) before_.push_back(vals_[s]);
                exec(p.body);
                for (size_t k = 0; k < p.write_slots.size(); ++k)
                    if (vals_[p.write_slots[k]] != before_[k]) changed = true;
            }
            if (!changed) return;
        }
        throw SimError("combinational instability");
    }

    void clock_edge() {
        edge_mode_ = true;
        blocking_.clear();
        nba_.clear();
        for (const Process& p : prog_.edge) {
            overlay_.clear();
            exec(p.body);
            blocking_.insert(blocking_.end(), overlay_.begin(), overlay_.end());
        }
        overlay_.clear();
        edge_mode_ = false;
        for (const auto& [slot, v] : blocking_) vals_[slot] = v;
        for (const auto& w : nba_) vals_[w.slot] = merge(vals_[w.slot], w.lo, w.width, w.value);
    }

private:
    struct Pending {
        uint32_t slot;
        uint32_t lo;
        uint32_t width;
        uint64_t value;
    };

    const Program& prog_;
    std::vector<uint64_t> vals_;
    std::vector<uint64_t> before_;
    bool edge_mode_ = false;
    std::vector<std::pair<uint32_t, uint64_t>> overlay_;  // blocking writes of the running edge process
    std::vector<std::pair<uint32_t, uint64_t>> blocking_;
    std::vector<Pending> nba_;

    static uint64_t merge(uint64_t old, uint32_t lo, uint32_t width, uint64_t v) {
        uint64_t m = shl(width_mask(width), lo);
        return (old & ~m) | (shl(v, lo) & m);
    }

    uint64_t read(uint32_t slot) const {
        for (auto it = overlay_.rbegin(); it != overlay_.rend(); ++it)
            if (it->first == slot) return it->second;
        return vals_[slot];
    }

    uint64_t eval(const Node& n) {
        uint64_t m = width_mask(n.width);
        switch (n.op) {
        case Op::Const: return n.value;
        case Op::Sig: return read(n.slot);
        case Op::Slice: return shr(read(n.slot), n.lo) & width_mask(n.widths[0]);
        case Op::DynBit: {
            uint64_t i = eval(n.kids[0]);
            int64_t off = n.descending ? static_cast<int64_t>(i) - n.base : static_cast<int64_t>(n.base) - static_cast<int64_t>(i);
            if (off < 0 || off >= static_cast<int64_t>(n.widths[0])) return 0;
            return (read(n.slot) >> off) & 1;
        }
        case Op::Not: return ~eval(n.kids[0]) & m;
        case Op::Neg: return (~eval(n.kids[0]) + 1) & m;
        case Op::LNot: return eval(n.kids[0]) == 0;
        case Op::RedAnd: return (eval(n.kids[0]) & width_mask(n.widths[0])) == width_mask(n.widths[0]);
        case Op::RedOr: return eval(n.kids[0]) != 0;
        case Op::RedXor: return __builtin_popcountll(eval(n.kids[0])) & 1;
        case Op::RedNand: return (eval(n.kids[0]) & width_mask(n.widths[0])) != width_mask(n.widths[0]);
        case Op::RedNor: return eval(n.kids[0]) == 0;
        case Op::RedXnor: return !(__builtin_popcountll(eval(n.kids[0])) & 1);
        case Op::Add: return (eval(n.kids[0]) + eval(n.kids[1])) & m;
        case Op::Sub: return (eval(n.kids[0]) - eval(n.kids[1])) & m;
        case Op::Mul: return (eval(n.kids[0]) * eval(n.kids[1])) & m;
        case Op::Div: {
            uint64_t a = eval(n.kids[0]), b = eval(n.kids[1]);
            return b ? (a / b) & m : 0;
        }
        case Op::Mod: {
            uint64_t a = eval(n.kids[0]), b = eval(n.kids[1]);
            return b ? (a % b) & m : 0;
        }
        case Op::Pow: {
            uint64_t a = eval(n.kids[0]), b = eval(n.kids[1]), r = 1;
            while (b) {
                if (b & 1) r = (r * a) & m;
                a = (a * a) & m;
                b >>= 1;
            }
            return r & m;
        }
        case Op::And: return eval(n.kids[0]) & eval(n.kids[1]);
        case Op::Or: return eval(n.kids[0]) | eval(n.kids[1]);
        case Op::Xor: return eval(n.kids[0]) ^ eval(n.kids[1]);
        case Op::Xnor: return ~(eval(n.kids[0]) ^ eval(n.kids[1])) & m;
        case Op::Shl: {
            uint64_t a = eval(n.kids[0]);
            return shl(a, eval(n.kids[1])) & m;
        }
        case Op::Shr: {
            uint64_t a = eval(n.kids[0]);
            return shr(a, eval(n.kids[1]));
        }
        case Op::Lt: return eval(n.kids[0]) < eval(n.kids[1]);
        case Op::Le: return eval(n.kids[0]) <= eval(n.kids[1]);
        case Op::Gt: return eval(n.kids[0]) > eval(n.kids[1]);
        case Op::Ge: return eval(n.kids[0]) >= eval(n.kids[1]);
        case Op::Eq: return eval(n.kids[0]) == eval(n.kids[1]);
        case Op::Ne: return eval(n.kids[0]) != eval(n.kids[1]);
        case Op::LAnd: return eval(n.kids[0]) != 0 && eval(n.kids[1]) != 0;
        case Op::LOr: return eval(n.kids[0]) != 0 || eval(n.kids[1]) != 0;
        case Op::Ternary: return eval(n.kids[0]) ? eval(n.kids[1]) : eval(n.kids[2]);
        case Op::Concat: {
            uint64_t acc = 0;
            for (size_t i = 0; i < n.kids.size(); ++i)
                acc = shl(acc, n.widths[i]) | (eval(n.kids[i]) & width_mask(n.widths[i]));
            return acc & m;
        }
        case Op::Repl: {
            uint64_t item = eval(n.kids[0]) & width_mask(n.widths[0]), acc = 0;
            for (uint64_t i = 0; i < n.value; ++i) acc = shl(acc, n.widths[0]) | item;
            return acc & m;
        }
        }
        return 0;
    }

    void write(const LvalPart& p, uint64_t v, bool nonblocking) {
        uint32_t lo = p.lo;
        if (p.dyn_index) {
            uint64_t i = eval(*p.dyn_index);
            int64_t off = p.descending ? static_cast<int64_t>(i) - p.base
                                       : static_cast<int64_t>(p.base) - static_cast<int64_t>(i);
            if (off < 0 || off >= static_cast<int64_t>(p.slot_width)) return;
            lo = static_cast<uint32_t>(off);
        }
        if (!edge_mode_) {
            vals_[p.slot] = merge(vals_[p.slot], lo, p.width, v);
        } else if (nonblocking) {
            nba_.push_back({p.slot, lo, p.width, v});
        } else {
            overlay_.emplace_back(p.slot, merge(read(p.slot), lo, p.width, v));
        }
    }

    void exec_list(const std::vector<Stmt>& list) {
        for (const Stmt& s : list) exec(s);
    }

    void exec(const Stmt& s) {
        switch (s.op) {
        case SOp::Nop: return;
        case SOp::Assign:
        case SOp::NbAssign: {
            uint64_t v = eval(s.rhs);
            bool nb = s.op == SOp::NbAssign;
            for (auto it = s.lhs.rbegin(); it != s.lhs.rend(); ++it) {
                write(*it, v & width_mask(it->width), nb);
                v = shr(v, it->width);
            }
            return;
        }
        case SOp::If:
            if (eval(s.rhs))
                exec_list(s.body);
            else
                exec_list(s.else_body);
            return;
        case SOp::Case: {
            uint64_t subject = eval(s.rhs);
            for (const auto& arm : s.arms)
                for (const auto& lab : arm.labels) {
                    if (lab.never) continue;
                    if (((subject ^ eval(lab.expr)) & lab.care & width_mask(s.rhs.width)) == 0) {
                        exec_list(arm.body);
                        return;
                    }
                }
            if (s.default_arm >= 0) exec_list(s.arms[static_cast<size_t>(s.default_arm)].body);
            return;
        }
        case SOp::Block: exec_list(s.body); return;
        }
    }
};

}  // namespace

Trace run(const ElaboratedDesign& design, const Stimulus& stimulus, size_t cycles,
          const std::vector<std::string>& record) {
    if (!design.program) throw SimError("design is not elaborated");
    const Program& prog = *design.program;
    if (cycles < 1) throw StimulusError("cycle count must be at least 1");
    if (prog.reset_slot && stimulus.reset_cycles < 1) throw StimulusError("reset_cycles must be at least 1");

    struct Write {
        size_t cycle;
        uint32_t slot;
        uint64_t value;
    };
    std::vector<Write> writes;
    for (const auto& w : stimulus.writes) {
        const SignalInfo* s = design.find(w.signal);
        bool is_input = s && s->kind == SignalKind::Input && s->name.find('.') == std::string::npos;
        if (!is_input) throw StimulusError("stimulus writes '" + w.signal + "', which is not a top-level input");
        if (prog.clock_slot && s->slot == *prog.clock_slot)
            throw StimulusError("stimulus writes the clock '" + w.signal + "', which the simulator drives");
        if (prog.reset_slot && s->slot == *prog.reset_slot)
            throw StimulusError("stimulus writes the reset '" + w.signal + "', which reset_cycles drives");
        if (w.value > width_mask(s->width))
            throw StimulusError("value " + std::to_string(w.value) + " does not fit the " + std::to_string(s->width) +
                           "-bit input '" + w.signal + "'");
        writes.push_back({w.cycle, s->slot, w.value});
    }
    std::stable_sort(writes.begin(), writes.end(), [](const Write& a, const Write& b) { return a.cycle < b.cycle; });

    Trace tr;
    tr.cycles = cycles;
    std::vector<uint32_t> slots;
    if (record.empty()) {
        for (const auto& s : design.signals) {
            tr.signals.push_back({s.name, s.width, {}});
            slots.push_back(s.slot);
        }
    } else {
        for (const auto& name : record) {
            const SignalInfo* s = design.find(name);
            if (!s) throw StimulusError("cannot record unknown signal '" + name + "'");
            tr.signals.push_back({s->name, s->width, {}});
            slots.push_back(s->slot);
        }
    }
    for (auto& s : tr.signals) s.values.reserve(cycles);

    Machine m(prog);
    auto& v = m.values();
    size_t next = 0;
    uint64_t asserted = prog.reset_active_low ? 0 : 1;
    for (size_t t = 0; t < cycles; ++t) {
        while (next < writes.size() && writes[next].cycle <= t) {
            v[writes[next].slot] = writes[next].value;
            ++next;
        }
        if (prog.reset_slot) v[*prog.reset_slot] = t < stimulus.reset_cycles ? asserted : asserted ^ 1;
        m.settle();
        m.clock_edge();
        m.settle();
        for (size_t k = 0; k < slots.size(); ++k) tr.signals[k].values.push_back(v[slots[k]]);
    }
    return tr;
}

}  // namespace veriloop::sim
