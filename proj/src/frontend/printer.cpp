// SPDX-License-Identifier: Apache-2.0
#include "veriloop/frontend/printer.hpp"

#include <sstream>

namespace veriloop::frontend {

namespace {

bool needs_parens(const Expr& e) {
    return e.kind == ExprKind::Unary || e.kind == ExprKind::Binary || e.kind == ExprKind::Ternary;
}

void print_expr(std::ostream& os, const Expr& e);

void print_operand(std::ostream& os, const Expr& e) {
    if (needs_parens(e)) {
        os << "(";
        print_expr(os, e);
        os << ")";
    } else {
        print_expr(os, e);
    }
}

void print_list(std::ostream& os, const std::vector<Expr>& items, size_t from) {
    for (size_t i = from; i < items.size(); ++i) {
        if (i > from) os << ", ";
        print_expr(os, items[i]);
    }
}

void print_expr(std::ostream& os, const Expr& e) {
    switch (e.kind) {
    case ExprKind::Identifier: os << e.name; return;
    case ExprKind::Number: os << e.text; return;
    case ExprKind::MacroRef: os << "`" << e.name; return;
    case ExprKind::Unary:
        os << e.op;
        print_operand(os, e.operands.at(0));
        return;
    case ExprKind::Binary:
        print_operand(os, e.operands.at(0));
        os << " " << e.op << " ";
        print_operand(os, e.operands.at(1));
        return;
    case ExprKind::Ternary:
        print_operand(os, e.operands.at(0));
        os << " ? ";
        print_operand(os, e.operands.at(1));
        os << " : ";
        print_operand(os, e.operands.at(2));
        return;
    case ExprKind::BitSelect:
        os << e.name << "[";
        print_expr(os, e.operands.at(0));
        os << "]";
        return;
    case ExprKind::PartSelect:
        os << e.name << "[";
        print_expr(os, e.operands.at(0));
        os << ":";
        print_expr(os, e.operands.at(1));
        os << "]";
        return;
    case ExprKind::Concat:
        os << "{";
        print_list(os, e.operands, 0);
        os << "}";
        return;
    case ExprKind::Replicate:
        os << "{";
        print_expr(os, e.operands.at(0));
        os << "{";
        print_list(os, e.operands, 1);
        os << "}}";
        return;
    case ExprKind::Invalid:
        throw PrintError("cannot print recovered tree");
    }
}

std::string range_text(const std::optional<Range>& r) {
    if (!r) return {};
    std::ostringstream os;
    os << "[";
    print_expr(os, r->msb);
    os << ":";
    print_expr(os, r->lsb);
    os << "] ";
    return os.str();
}

class Printer {
public:
    std::string module(const ModuleDecl& m) {
        os_ << "module " << m.name;
        if (!m.params.empty()) {
            os_ << " #(\n";
            for (size_t i = 0; i < m.params.size(); ++i) {
                const auto& p = m.params[i];
                os_ << "    " << (p.local ? "localparam " : "parameter ") << range_text(p.range) << p.name
                    << " = ";
                print_expr(os_, p.value);
                os_ << (i + 1 < m.params.size() ? ",\n" : "\n");
            }
            os_ << ")";
        }
        if (!m.ports.empty()) {
            os_ << " (\n";
            for (size_t i = 0; i < m.ports.size(); ++i) {
                const auto& p = m.ports[i];
                os_ << "    " << direction_name(p.dir) << " ";
                if (p.net != NetType::None) os_ << net_type_name(p.net) << " ";
                if (p.is_signed) os_ << "signed ";
                os_ << range_text(p.range) << p.name << (i + 1 < m.ports.size() ? ",\n" : "\n");
            }
            os_ << ")";
        }
        os_ << ";\n";
        for (const auto& item : m.items) std::visit([&](const auto& it) { this->item(it); }, item);
        os_ << "endmodule\n";
        return os_.str();
    }

private:
    std::ostringstream os_;

    void indent(int depth) { os_ << std::string(static_cast<size_t>(depth) * 4, ' '); }

    void item(const NetDecl& n) {
        os_ << "    " << net_type_name(n.type) << " ";
        if (n.is_signed && n.type != NetType::Integer) os_ << "signed ";
        os_ << range_text(n.range) << n.name;
        if (n.init) {
            os_ << " = ";
            print_expr(os_, *n.init);
        }
        os_ << ";\n";
    }

    void item(const ParamDecl& p) {
        os_ << "    " << (p.local ? "localparam " : "parameter ") << range_text(p.range) << p.name << " = ";
        print_expr(os_, p.value);
        os_ << ";\n";
    }

    void item(const ContinuousAssign& a) {
        os_ << "    assign ";
        print_expr(os_, a.lhs);
        os_ << " = ";
        print_expr(os_, a.rhs);
        os_ << ";\n";
    }

    void item(const AlwaysBlock& a) {
        os_ << "    always";
        switch (a.sensitivity.kind) {
        case Sensitivity::Kind::Star: os_ << " @(*)"; break;
        case Sensitivity::Kind::None: break;
        case Sensitivity::Kind::List:
            os_ << " @(";
            for (size_t i = 0; i < a.sensitivity.events.size(); ++i) {
                const auto& ev = a.sensitivity.events[i];
                if (i > 0) os_ << " or ";
                if (ev.edge == EdgeKind::Posedge) os_ << "posedge ";
                if (ev.edge == EdgeKind::Negedge) os_ << "negedge ";
                os_ << ev.signal;
            }
            os_ << ")";
            break;
        }
        statement_tail(a.body, 1);
    }

    void item(const InitialBlock& b) {
        os_ << "    initial";
        statement_tail(b.body, 1);
    }

    void connections(const std::vector<Connection>& conns) {
        for (size_t i = 0; i < conns.size(); ++i) {
            const auto& c = conns[i];
            if (i > 0) os_ << ", ";
            if (!c.port.empty()) {
                os_ << "." << c.port << "(";
                if (c.expr) print_expr(os_, *c.expr);
                os_ << ")";
            } else if (c.expr) {
                print_expr(os_, *c.expr);
            }
        }
    }

    void item(const Instantiation& inst) {
        os_ << "    " << inst.module_name;
        if (!inst.params.empty()) {
            os_ << " #(";
            connections(inst.params);
            os_ << ")";
        }
        os_ << " " << inst.instance_name << " (";
        connections(inst.ports);
        os_ << ");\n";
    }

    // Continues the current line with a statement; blocks open on the same line.
    void statement_tail(const Statement& s, int depth) {
        if (s.kind == StmtKind::Block) {
            os_ << " ";
            statement(s, depth, false);
        } else {
            os_ << "\n";
            statement(s, depth + 1, true);
        }
    }

    void statement(const Statement& s, int depth, bool do_indent) {
        if (do_indent) indent(depth);
        switch (s.kind) {
        case StmtKind::Invalid:
            throw PrintError("cannot print recovered tree");
        case StmtKind::Null:
            os_ << ";\n";
            return;
        case StmtKind::Blocking:
        case StmtKind::Nonblocking:
            print_expr(os_, s.target);
            os_ << (s.kind == StmtKind::Blocking ? " = " : " <= ");
            print_expr(os_, s.value);
            os_ << ";\n";
            return;
        case StmtKind::Block:
            os_ << "begin";
            if (!s.name.empty()) os_ << " : " << s.name;
            os_ << "\n";
            for (const auto& b : s.body) statement(b, depth + 1, true);
            indent(depth);
            os_ << "end\n";
            return;
        case StmtKind::If:
            os_ << "if (";
            print_expr(os_, s.value);
            os_ << ")";
            statement_tail(s.body.at(0), depth);
            if (!s.else_body.empty()) {
                indent(depth);
                os_ << "else";
                statement_tail(s.else_body[0], depth);
            }
            return;
        case StmtKind::Case:
            os_ << (s.case_kind == CaseKind::Casez   ? "casez ("
                    : s.case_kind == CaseKind::Casex ? "casex ("
                                                     : "case (");
            print_expr(os_, s.value);
            os_ << ")\n";
            for (const auto& item : s.items) {
                indent(depth + 1);
                if (item.is_default) {
                    os_ << "default:";
                } else {
                    print_list(os_, item.labels, 0);
                    os_ << ":";
                }
                statement_tail(item.body.at(0), depth + 1);
            }
            indent(depth);
            os_ << "endcase\n";
            return;
        case StmtKind::Delay:
            os_ << "#";
            if (s.value.kind == ExprKind::Number || s.value.kind == ExprKind::Identifier) {
                print_expr(os_, s.value);
            } else {
                os_ << "(";
                print_expr(os_, s.value);
                os_ << ")";
            }
            os_ << " ";
            statement(s.body.at(0), depth, false);
            return;
        case StmtKind::SystemCall:
            os_ << s.name;
            if (!s.args.empty()) {
                os_ << "(";
                print_list(os_, s.args, 0);
                os_ << ")";
            }
            os_ << ";\n";
            return;
        }
    }
};

}  // namespace

std::string to_string(const Expr& expr) {
    std::ostringstream os;
    print_expr(os, expr);
    return os.str();
}

std::string pretty_print(const ModuleDecl& module) { return Printer().module(module); }

std::string pretty_print(const Ast& ast) {
    if (ast.recovered()) throw PrintError("cannot print recovered tree");
    std::string out;
    for (size_t i = 0; i < ast.modules.size(); ++i) {
        if (i > 0) out += "\n";
        out += pretty_print(ast.modules[i]);
    }
    return out;
}

}  // namespace veriloop::frontend
