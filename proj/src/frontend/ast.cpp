// SPDX-License-Identifier: Apache-2.0
#include "veriloop/frontend/ast.hpp"

#include <algorithm>
#include <sstream>

namespace veriloop::frontend {

Expr Expr::identifier(std::string name, Span span) {
    Expr e;
    e.kind = ExprKind::Identifier;
    e.name = std::move(name);
    e.span = span;
    return e;
}

Expr Expr::number(uint64_t value, uint32_t width, Span span) {
    Expr e;
    e.kind = ExprKind::Number;
    e.literal.width = width;
    e.literal.sized = true;
    e.literal.value = value;
    e.literal.base = NumberBase::Decimal;
    e.text = std::to_string(width) + "'d" + std::to_string(value);
    e.span = span;
    return e;
}

const CaseItem* Statement::default_item() const {
    for (const auto& item : items)
        if (item.is_default) return &item;
    return nullptr;
}

std::string_view direction_name(Direction d) {
    switch (d) {
    case Direction::Input: return "input";
    case Direction::Output: return "output";
    case Direction::Inout: return "inout";
    }
    return "?";
}

std::string_view net_type_name(NetType t) {
    switch (t) {
    case NetType::None: return "";
    case NetType::Wire: return "wire";
    case NetType::Reg: return "reg";
    case NetType::Integer: return "integer";
    }
    return "?";
}

size_t Sensitivity::edge_count() const {
    return static_cast<size_t>(std::count_if(events.begin(), events.end(), [](const EdgeEvent& e) {
        return e.edge != EdgeKind::Level;
    }));
}

bool Sensitivity::is_combinational() const {
    return kind == Kind::Star || (kind == Kind::List && edge_count() == 0 && !events.empty());
}

const PortDecl* ModuleDecl::find_port(std::string_view n) const {
    for (const auto& p : ports)
        if (p.name == n) return &p;
    return nullptr;
}

namespace {

void dump_expr(std::ostream& os, const Expr& e) {
    switch (e.kind) {
    case ExprKind::Identifier: os << "(id " << e.name << ")"; return;
    case ExprKind::Number:
        os << "(num " << e.literal.width << (e.literal.sized ? "s" : "u") << " " << e.literal.value
           << " " << e.literal.xz_mask << ")";
        return;
    case ExprKind::MacroRef: os << "(macro " << e.name << ")"; return;
    case ExprKind::Unary: os << "(unary " << e.op; break;
    case ExprKind::Binary: os << "(binary " << e.op; break;
    case ExprKind::Ternary: os << "(ternary"; break;
    case ExprKind::BitSelect: os << "(bit " << e.name; break;
    case ExprKind::PartSelect: os << "(part " << e.name; break;
    case ExprKind::Concat: os << "(concat"; break;
    case ExprKind::Replicate: os << "(repl"; break;
    case ExprKind::Invalid: os << "(invalid)"; return;
    }
    for (const auto& o : e.operands) {
        os << " ";
        dump_expr(os, o);
    }
    os << ")";
}

void dump_range(std::ostream& os, const std::optional<Range>& r) {
    if (!r) return;
    os << " [";
    dump_expr(os, r->msb);
    os << ":";
    dump_expr(os, r->lsb);
    os << "]";
}

void dump_stmt(std::ostream& os, const Statement& s, int depth) {
    std::string pad(static_cast<size_t>(depth) * 2, ' ');
    os << pad;
    switch (s.kind) {
    case StmtKind::Null: os << "(null)\n"; return;
    case StmtKind::Invalid: os << "(invalid)\n"; return;
    case StmtKind::Blocking:
    case StmtKind::Nonblocking:
        os << (s.kind == StmtKind::Blocking ? "(= " : "(<= ");
        dump_expr(os, s.target);
        os << " ";
        dump_expr(os, s.value);
        os << ")\n";
        return;
    case StmtKind::If:
        os << "(if ";
        dump_expr(os, s.value);
        os << "\n";
        for (const auto& b : s.body) dump_stmt(os, b, depth + 1);
        if (!s.else_body.empty()) {
            os << pad << " else\n";
            for (const auto& b : s.else_body) dump_stmt(os, b, depth + 1);
        }
        os << pad << ")\n";
        return;
    case StmtKind::Case:
        os << "(case" << static_cast<int>(s.case_kind) << " ";
        dump_expr(os, s.value);
        os << "\n";
        for (const auto& item : s.items) {
            os << pad << " (item" << (item.is_default ? " default" : "");
            for (const auto& l : item.labels) {
                os << " ";
                dump_expr(os, l);
            }
            os << "\n";
            for (const auto& b : item.body) dump_stmt(os, b, depth + 2);
            os << pad << " )\n";
        }
        os << pad << ")\n";
        return;
    case StmtKind::Block:
        os << "(block " << s.name << "\n";
        for (const auto& b : s.body) dump_stmt(os, b, depth + 1);
        os << pad << ")\n";
        return;
    case StmtKind::Delay:
        os << "(delay ";
        dump_expr(os, s.value);
        os << "\n";
        for (const auto& b : s.body) dump_stmt(os, b, depth + 1);
        os << pad << ")\n";
        return;
    case StmtKind::SystemCall:
        os << "(call " << s.name;
        for (const auto& a : s.args) {
            os << " ";
            if (!a.text.empty() && a.text[0] == '"')
                os << a.text;
            else
                dump_expr(os, a);
        }
        os << ")\n";
        return;
    }
}

void dump_module(std::ostream& os, const ModuleDecl& m) {
    os << "(module " << m.name << "\n";
    for (const auto& p : m.params) {
        os << "  (param " << (p.local ? "local " : "") << p.name;
        dump_range(os, p.range);
        os << " ";
        dump_expr(os, p.value);
        os << ")\n";
    }
    for (const auto& p : m.ports) {
        os << "  (port " << direction_name(p.dir) << " " << net_type_name(p.net)
           << (p.is_signed ? " signed" : "") << " " << p.name;
        dump_range(os, p.range);
        os << ")\n";
    }
    for (const auto& item : m.items) {
        std::visit(
            [&](const auto& it) {
                using T = std::decay_t<decltype(it)>;
                if constexpr (std::is_same_v<T, NetDecl>) {
                    os << "  (net " << net_type_name(it.type) << (it.is_signed ? " signed" : "") << " "
                       << it.name;
                    dump_range(os, it.range);
                    if (it.init) {
                        os << " = ";
                        dump_expr(os, *it.init);
                    }
                    os << ")\n";
                } else if constexpr (std::is_same_v<T, ParamDecl>) {
                    os << "  (param " << (it.local ? "local " : "") << it.name;
                    dump_range(os, it.range);
                    os << " ";
                    dump_expr(os, it.value);
                    os << ")\n";
                } else if constexpr (std::is_same_v<T, ContinuousAssign>) {
                    os << "  (assign ";
                    dump_expr(os, it.lhs);
                    os << " ";
                    dump_expr(os, it.rhs);
                    os << ")\n";
                } else if constexpr (std::is_same_v<T, AlwaysBlock>) {
                    os << "  (always ";
                    switch (it.sensitivity.kind) {
                    case Sensitivity::Kind::Star: os << "*"; break;
                    case Sensitivity::Kind::None: os << "none"; break;
                    case Sensitivity::Kind::List:
                        for (const auto& ev : it.sensitivity.events)
                            os << (ev.edge == EdgeKind::Posedge   ? "pos:"
                                   : ev.edge == EdgeKind::Negedge ? "neg:"
                                                                   : "lvl:")
                               << ev.signal << " ";
                        break;
                    }
                    os << "\n";
                    dump_stmt(os, it.body, 2);
                    os << "  )\n";
                } else if constexpr (std::is_same_v<T, InitialBlock>) {
                    os << "  (initial\n";
                    dump_stmt(os, it.body, 2);
                    os << "  )\n";
                } else if constexpr (std::is_same_v<T, Instantiation>) {
                    os << "  (inst " << it.module_name << " " << it.instance_name;
                    for (const auto& c : it.params) {
                        os << " (p " << c.port << " ";
                        if (c.expr) dump_expr(os, *c.expr);
                        os << ")";
                    }
                    for (const auto& c : it.ports) {
                        os << " (c " << c.port << " ";
                        if (c.expr) dump_expr(os, *c.expr);
                        os << ")";
                    }
                    os << ")\n";
                }
            },
            item);
    }
    os << ")\n";
}

}  // namespace

std::string dump(const Expr& expr) {
    std::ostringstream os;
    dump_expr(os, expr);
    return os.str();
}

std::string dump(const Ast& ast) {
    std::ostringstream os;
    for (const auto& m : ast.modules) dump_module(os, m);
    return os.str();
}

bool structurally_equal(const Ast& a, const Ast& b) { return dump(a) == dump(b); }

}  // namespace veriloop::frontend
