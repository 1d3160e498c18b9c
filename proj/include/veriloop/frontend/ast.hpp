// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "veriloop/diagnostic.hpp"
#include "veriloop/frontend/token.hpp"

namespace veriloop::frontend {

enum class ExprKind {
    Identifier,
    Number,
    MacroRef,  // use of an undefined macro, kept opaque
    Unary,
    Binary,
    Ternary,     // operands: cond, then, else
    BitSelect,   // name[operands[0]]
    PartSelect,  // name[operands[0]:operands[1]]
    Concat,
    Replicate,  // operands[0] is the count, the rest are the items
    Invalid,    // recovery placeholder
};

struct Expr {
    ExprKind kind = ExprKind::Invalid;
    std::string name;  // identifier / select base / macro name
    std::string op;    // unary and binary operator text
    std::string text;  // literal source text
    LiteralValue literal;
    std::vector<Expr> operands;
    Span span;

    static Expr identifier(std::string name, Span span = {});
    static Expr number(uint64_t value, uint32_t width, Span span = {});
};

enum class StmtKind {
    Null,
    Blocking,
    Nonblocking,
    If,
    Case,
    Block,
    Delay,       // #value body[0]
    SystemCall,  // $name(args);
    Invalid,     // recovery placeholder
};

enum class CaseKind { Case, Casez, Casex };

struct Statement;

struct CaseItem {
    std::vector<Expr> labels;  // empty for the default arm
    std::vector<Statement> body;  // exactly one statement
    bool is_default = false;
    Span span;
};

struct Statement {
    StmtKind kind = StmtKind::Null;
    Span span;
    Expr target;  // assignment lvalue
    Expr value;   // assignment rhs, if condition, case subject, delay amount
    std::vector<Statement> body;       // block contents; if: then branch; delay: inner
    std::vector<Statement> else_body;  // if: else branch (0 or 1 entries)
    std::vector<CaseItem> items;
    CaseKind case_kind = CaseKind::Case;
    std::string name;  // block label or system task name
    std::vector<Expr> args;

    const CaseItem* default_item() const;
};

enum class Direction { Input, Output, Inout };
enum class NetType { None, Wire, Reg, Integer };

std::string_view direction_name(Direction d);
std::string_view net_type_name(NetType t);

struct Range {
    Expr msb;
    Expr lsb;
};

struct PortDecl {
    std::string name;
    Direction dir = Direction::Input;
    NetType net = NetType::None;
    bool is_signed = false;
    std::optional<Range> range;
    Span span;
};

struct ParamDecl {
    std::string name;
    bool local = false;
    std::optional<Range> range;
    Expr value;
    Span span;
};

struct NetDecl {
    std::string name;
    NetType type = NetType::Wire;
    bool is_signed = false;
    std::optional<Range> range;
    std::optional<Expr> init;
    Span span;
};

struct ContinuousAssign {
    Expr lhs;
    Expr rhs;
    Span span;
};

enum class EdgeKind { Posedge, Negedge, Level };

struct EdgeEvent {
    EdgeKind edge = EdgeKind::Posedge;
    std::string signal;
    Span span;
};

struct Sensitivity {
    enum class Kind { Star, List, None };
    Kind kind = Kind::None;
    std::vector<EdgeEvent> events;
    Span span;

    size_t edge_count() const;
    bool is_combinational() const;
};

struct AlwaysBlock {
    Sensitivity sensitivity;
    Statement body;
    Span span;
};

struct InitialBlock {
    Statement body;
    Span span;
};

struct Connection {
    std::string port;  // empty for positional connections
    std::optional<Expr> expr;  // empty for .port()
    Span span;
};

struct Instantiation {
    std::string module_name;
    std::vector<Connection> params;
    std::string instance_name;
    std::vector<Connection> ports;
    Span span;
};

using ModuleItem =
    std::variant<NetDecl, ParamDecl, ContinuousAssign, AlwaysBlock, InitialBlock, Instantiation>;

struct ModuleDecl {
    std::string name;
    std::vector<ParamDecl> params;  // from the #( ... ) header
    std::vector<PortDecl> ports;
    std::vector<ModuleItem> items;
    Span span;
    Span name_span;

    const PortDecl* find_port(std::string_view name) const;
};

enum class RecoveryContext { TopLevel, Module, Block, Case, Statement, Expression };

/// Record of one panic-mode recovery: what the parser wanted and what it saw.
struct RecoveryEvent {
    Span span;
    std::string expected;
    std::string found;
    RecoveryContext context = RecoveryContext::Statement;
};

struct Ast {
    uint32_t file = 0;
    std::vector<ModuleDecl> modules;
    std::vector<RecoveryEvent> recoveries;

    bool recovered() const { return !recoveries.empty(); }
};

using MacroTable = std::map<std::string, TokenList>;

/// Canonical span-free rendering of a tree, used for structural equality.
std::string dump(const Ast& ast);
std::string dump(const Expr& expr);
bool structurally_equal(const Ast& a, const Ast& b);

// Visitors over every statement of a tree, pre-order.
template <typename Fn>
void for_each_statement(const Statement& stmt, Fn&& fn) {
    fn(stmt);
    for (const auto& s : stmt.body) for_each_statement(s, fn);
    for (const auto& s : stmt.else_body) for_each_statement(s, fn);
    for (const auto& item : stmt.items)
        for (const auto& s : item.body) for_each_statement(s, fn);
}

template <typename Fn>
void for_each_expr(const Expr& expr, Fn&& fn) {
    fn(expr);
    for (const auto& e : expr.operands) for_each_expr(e, fn);
}

}  // namespace veriloop::frontend
