// SPDX-License-Identifier: Apache-2.0
#pragma once

// Random generator for well-formed programs in the supported Verilog subset.
// Every identifier it emits is declared, so a correct frontend reports no
// diagnostics on its output.

#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace testutil {

class ProgramGen {
public:
    explicit ProgramGen(uint64_t seed) : rng_(seed) {}

    std::string program() {
        std::ostringstream os;
        int modules = pick(1, 3);
        declared_modules_.clear();
        for (int m = 0; m < modules; ++m) os << module("m" + std::to_string(seed_tag()) + "_" + std::to_string(m)) << "\n";
        return os.str();
    }

private:
    struct Signal {
        std::string name;
        int width;
    };
    struct ModuleSig {
        std::string name;
        std::vector<Signal> inputs;
        std::vector<Signal> outputs;
    };

    std::mt19937_64 rng_;
    std::vector<Signal> readable_;
    std::vector<Signal> comb_targets_;
    std::vector<Signal> seq_targets_;
    std::vector<std::string> params_;
    std::vector<ModuleSig> declared_modules_;
    int tag_ = 0;

    int seed_tag() { return tag_++; }
    int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool chance(int pct) { return pick(1, 100) <= pct; }
    template <typename T>
    const T& one_of(const std::vector<T>& v) { return v[static_cast<size_t>(pick(0, static_cast<int>(v.size()) - 1))]; }

    std::string range(int width) {
        if (width == 1 && chance(70)) return "";
        if (!params_.empty() && chance(20)) return "[" + one_of(params_) + "-1:0] ";
        return "[" + std::to_string(width - 1) + ":0] ";
    }

    std::string literal() {
        int w = pick(1, 16);
        uint64_t v = std::uniform_int_distribution<uint64_t>(0, (uint64_t{1} << w) - 1)(rng_);
        switch (pick(0, 4)) {
        case 0: return std::to_string(v);
        case 1: {
            std::string bits;
            for (int i = w - 1; i >= 0; --i) bits.push_back(((v >> i) & 1) ? '1' : '0');
            return std::to_string(w) + "'b" + bits;
        }
        case 2: {
            std::ostringstream os;
            os << w << "'h" << std::hex << v;
            return os.str();
        }
        case 3: {
            std::ostringstream os;
            os << w << "'o" << std::oct << v;
            return os.str();
        }
        default: return std::to_string(w) + "'d" + std::to_string(v);
        }
    }

    std::string primary(int depth) {
        const auto& s = one_of(readable_);
        switch (pick(0, 7)) {
        case 0: return literal();
        case 1:
            if (s.width > 1) return s.name + "[" + std::to_string(pick(0, s.width - 1)) + "]";
            return s.name;
        case 2:
            if (s.width > 2) {
                int lo = pick(0, s.width - 2);
                return s.name + "[" + std::to_string(pick(lo, s.width - 1)) + ":" + std::to_string(lo) + "]";
            }
            return s.name;
        case 3:
            if (depth < 3) return "{" + expr(depth + 1) + ", " + expr(depth + 1) + "}";
            return s.name;
        case 4:
            if (depth < 3) return "{" + std::to_string(pick(1, 4)) + "{" + expr(depth + 1) + "}}";
            return s.name;
        case 5:
            if (!params_.empty()) return one_of(params_);
            return s.name;
        default: return s.name;
        }
    }

    std::string expr(int depth = 0) {
        static const std::vector<std::string> binops = {"+", "-", "*", "&", "|", "^", "&&", "||", "==", "!=",
                                                        "<", "<=", ">", ">=", "<<", ">>", "~^", "%", "/"};
        static const std::vector<std::string> unops = {"~", "!", "-", "&", "|", "^", "~&", "~|"};
        if (depth >= 4 || chance(35)) return primary(depth);
        switch (pick(0, 4)) {
        case 0: return one_of(unops) + "(" + expr(depth + 1) + ")";
        case 1: return "(" + expr(depth + 1) + ")";
        case 2: return expr(depth + 1) + " ? " + expr(depth + 1) + " : " + expr(depth + 1);
        default: {
            // Unparenthesized chains exercise precedence and associativity.
            std::string out = expr(depth + 1);
            int n = pick(1, 3);
            for (int i = 0; i < n; ++i) out += " " + one_of(binops) + " " + primary(depth + 1);
            return out;
        }
        }
    }

    std::string lvalue(const Signal& s) {
        if (s.width > 1 && chance(25)) {
            int lo = pick(0, s.width - 1);
            if (chance(50)) return s.name + "[" + std::to_string(lo) + "]";
            return s.name + "[" + std::to_string(pick(lo, s.width - 1)) + ":" + std::to_string(lo) + "]";
        }
        return s.name;
    }

    std::string pad(int depth) { return std::string(static_cast<size_t>(depth) * 2, ' '); }

    std::string stmt(const std::vector<Signal>& targets, bool nonblocking, int depth) {
        const char* op = nonblocking ? " <= " : " = ";
        int kind = depth > 3 ? 0 : pick(0, 4);
        std::ostringstream os;
        switch (kind) {
        case 1:
            os << pad(depth) << "if (" << expr() << ")";
            os << (chance(50) ? "\n" + stmt(targets, nonblocking, depth + 1) : " " + block(targets, nonblocking, depth));
            if (chance(60)) os << pad(depth) << "else\n" << stmt(targets, nonblocking, depth + 1);
            return os.str();
        case 2: {
            os << pad(depth) << (chance(20) ? "casez" : "case") << " (" << expr() << ")\n";
            int arms = pick(1, 3);
            for (int i = 0; i < arms; ++i) {
                os << pad(depth + 1) << literal();
                if (chance(30)) os << ", " << literal();
                os << ":\n" << stmt(targets, nonblocking, depth + 2);
            }
            if (chance(60)) os << pad(depth + 1) << "default:\n" << stmt(targets, nonblocking, depth + 2);
            os << pad(depth) << "endcase\n";
            return os.str();
        }
        case 3: return pad(depth) + block(targets, nonblocking, depth);
        case 4:
            if (chance(20)) return pad(depth) + ";\n";
            [[fallthrough]];
        default: os << pad(depth) << lvalue(one_of(targets)) << op << expr() << ";\n"; return os.str();
        }
    }

    std::string block(const std::vector<Signal>& targets, bool nonblocking, int depth) {
        std::ostringstream os;
        os << "begin";
        if (chance(15)) os << " : blk" << pick(0, 99);
        os << "\n";
        int n = pick(0, 3);
        for (int i = 0; i < n; ++i) os << stmt(targets, nonblocking, depth + 1);
        os << pad(depth) << "end\n";
        return os.str();
    }

    std::string module(const std::string& name) {
        readable_.clear();
        comb_targets_.clear();
        seq_targets_.clear();
        params_.clear();
        ModuleSig sig{name, {}, {}};
        std::ostringstream os;
        os << "module " << name;
        if (chance(50)) {
            params_.push_back("W");
            os << " #(parameter W = " << pick(2, 8) << ")";
        }
        os << " (\n  input wire clk";
        readable_.push_back({"clk", 1});
        int ins = pick(1, 3), outs = pick(1, 3);
        for (int i = 0; i < ins; ++i) {
            Signal s{"in" + std::to_string(i), pick(1, 8)};
            os << ",\n  input " << (chance(50) ? "wire " : "") << range(s.width) << s.name;
            if (os.str().find("[W-1:0] " + s.name) != std::string::npos) s.width = 2;
            readable_.push_back(s);
            sig.inputs.push_back(s);
        }
        std::vector<Signal> out_regs, out_wires;
        for (int i = 0; i < outs; ++i) {
            Signal s{"out" + std::to_string(i), pick(1, 8)};
            bool is_reg = chance(50);
            os << ",\n  output " << (is_reg ? "reg " : "wire ") << range(s.width) << s.name;
            if (os.str().find("[W-1:0] " + s.name) != std::string::npos) s.width = 2;
            (is_reg ? out_regs : out_wires).push_back(s);
            readable_.push_back(s);
            sig.outputs.push_back(s);
        }
        os << "\n);\n";
        if (chance(40)) {
            os << "  localparam L" << " = " << pick(0, 15) << ";\n";
            params_.push_back("L");
        }
        std::vector<Signal> wires = out_wires, regs = out_regs;
        int locals = pick(0, 3);
        for (int i = 0; i < locals; ++i) {
            Signal s{"n" + std::to_string(i), pick(1, 8)};
            bool is_reg = chance(50);
            os << "  " << (is_reg ? "reg " : "wire ") << "[" << s.width - 1 << ":0] " << s.name << ";\n";
            (is_reg ? regs : wires).push_back(s);
            readable_.push_back(s);
        }
        for (const auto& w : wires) os << "  assign " << w.name << " = " << expr() << ";\n";
        // Child instantiation of an earlier module, named or positional.
        if (!declared_modules_.empty() && chance(60)) {
            const ModuleSig& child = one_of(declared_modules_);
            Signal sink{"child_o", 8};
            os << "  wire [7:0] child_o;\n";
            readable_.push_back(sink);
            bool named = chance(60);
            os << "  " << child.name << " u_" << child.name << " (";
            std::vector<std::string> conns;
            conns.push_back(named ? ".clk(clk)" : "clk");
            for (const auto& in : child.inputs) conns.push_back(named ? "." + in.name + "(" + primary(2) + ")" : primary(2));
            for (size_t i = 0; i < child.outputs.size(); ++i) {
                if (named)
                    conns.push_back("." + child.outputs[i].name + (i == 0 ? "(child_o)" : "()"));
                else
                    conns.push_back("child_o");
            }
            for (size_t i = 0; i < conns.size(); ++i) os << (i ? ", " : "") << conns[i];
            os << ");\n";
        }
        if (!regs.empty()) {
            std::vector<Signal> comb, seq;
            for (const auto& r : regs) (chance(50) ? comb : seq).push_back(r);
            if (!comb.empty()) os << "  always @(*) " << block(comb, false, 1);
            if (!seq.empty()) {
                os << "  always @(posedge clk) " << block(seq, true, 1);
            }
        }
        os << "endmodule\n";
        declared_modules_.push_back(sig);
        return os.str();
    }
};

}  // namespace testutil
