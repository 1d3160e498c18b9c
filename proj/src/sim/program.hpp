// SPDX-License-Identifier: Apache-2.0
// Compiled form of an elaborated design, shared by elaboration and the runner.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace veriloop::sim::detail {

enum class Op : uint8_t {
    Const,
    Sig,       // whole slot
    Slice,     // constant part of a slot: lo, width
    DynBit,    // kids[0] is the index, already offset-adjusted
    Not,
    Neg,
    LNot,
    RedAnd,
    RedOr,
    RedXor,
    RedNand,
    RedNor,
    RedXnor,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Pow,
    And,
    Or,
    Xor,
    Xnor,
    Shl,
    Shr,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    LAnd,
    LOr,
    Ternary,
    Concat,  // kids most significant first; kid widths in `widths`
    Repl,    // count in `value`, kids[0] is the item of width widths[0]
};

struct Node {
    Op op = Op::Const;
    uint32_t width = 1;  // result width; results are masked to it
    uint32_t slot = 0;
    uint32_t lo = 0;
    uint64_t value = 0;
    // For DynBit: slot width and the index mapping (offset = sign ? base - i : i - base).
    uint32_t base = 0;
    bool descending = true;
    std::vector<uint32_t> widths;
    std::vector<Node> kids;
};

struct LvalPart {
    uint32_t slot = 0;
    uint32_t lo = 0;
    uint32_t width = 1;
    uint32_t slot_width = 1;
    std::optional<Node> dyn_index;  // bit select with a run-time index
    uint32_t base = 0;
    bool descending = true;
};

enum class SOp : uint8_t { Nop, Assign, NbAssign, If, Case, Block };

struct CaseLabel {
    Node expr;
    uint64_t care = ~uint64_t{0};  // bits that must match
    bool never = false;            // x/z label in a plain case
};

struct Stmt;

struct CaseArm {
    std::vector<CaseLabel> labels;
    std::vector<Stmt> body;
};

struct Stmt {
    SOp op = SOp::Nop;
    std::vector<LvalPart> lhs;  // most significant first
    Node rhs;                   // assignment value, if condition, case subject
    std::vector<Stmt> body;     // block items, if-then
    std::vector<Stmt> else_body;
    std::vector<CaseArm> arms;
    int default_arm = -1;
};

struct BitRange {
    uint32_t slot;
    uint32_t lo;
    uint32_t hi;
};

struct Process {
    Stmt body;
    bool continuous = false;  // assign or port connection
    std::vector<BitRange> reads;
    std::vector<BitRange> writes;
    std::vector<uint32_t> write_slots;
    size_t info = 0;  // index into the design's ProcessInfo list
};

struct Program {
    uint32_t slot_count = 0;
    std::vector<uint32_t> slot_width;
    std::vector<Process> comb;  // topological order
    std::vector<Process> edge;
    std::optional<uint32_t> clock_slot;
    std::optional<uint32_t> reset_slot;
    bool reset_active_low = true;
    std::vector<uint32_t> input_slots;
};

}  // namespace veriloop::sim::detail
