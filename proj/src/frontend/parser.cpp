// SPDX-License-Identifier: Apache-2.0
#include "veriloop/frontend/parser.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "veriloop/frontend/lexer.hpp"
#include "veriloop/frontend/preprocess.hpp"

namespace veriloop::frontend {

namespace {

struct FloodAbort {};

int binary_precedence(const Token& t) {
    if (t.kind != TokenKind::Operator) return -1;
    const std::string& op = t.text;
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "|") return 3;
    if (op == "^" || op == "~^" || op == "^~") return 4;
    if (op == "&") return 5;
    if (op == "==" || op == "!=" || op == "===" || op == "!==") return 6;
    if (op == "<" || op == "<=" || op == ">" || op == ">=") return 7;
    if (op == "<<" || op == ">>" || op == "<<<" || op == ">>>") return 8;
    if (op == "+" || op == "-") return 9;
    if (op == "*" || op == "/" || op == "%") return 10;
    if (op == "**") return 11;
    return -1;
}

bool is_unary_op(const Token& t) {
    if (t.kind != TokenKind::Operator) return false;
    static const std::set<std::string, std::less<>> ops = {"+", "-", "!", "~", "&", "|",
                                                           "^", "~&", "~|", "~^", "^~"};
    return ops.count(t.text) != 0;
}

std::string describe(const Token& t) {
    if (t.kind == TokenKind::EndOfFile) return "end of file";
    return "'" + t.text + "'";
}

std::string_view block_hint(RecoveryContext ctx, std::string_view expected) {
    if (ctx == RecoveryContext::Block && expected == "end")
        return "every 'begin' must be closed by a matching 'end'; '}' only closes a concatenation";
    if (ctx == RecoveryContext::Case && expected == "endcase")
        return "a case statement must be closed with 'endcase', not 'end'";
    if (ctx == RecoveryContext::Module) return "close the module with 'endmodule'";
    return {};
}

class Parser {
public:
    Parser(const TokenList& tokens, uint32_t file) : toks_(tokens), file_(file) {
        result_.ast.file = file;
        if (toks_.empty() || toks_.back().kind != TokenKind::EndOfFile) {
            owned_ = toks_;
            Token eof;
            eof.kind = TokenKind::EndOfFile;
            eof.span.file = file;
            if (!owned_.empty()) {
                const Span& last = owned_.back().span;
                eof.span.start = eof.span.end = last.end;
                eof.span.line = eof.span.end_line = last.end_line;
                eof.span.col = eof.span.end_col = last.end_col;
            }
            owned_.push_back(eof);
            use_owned_ = true;
        }
    }

    ParseResult run() {
        try {
            while (!at_eof()) {
                if (peek().is_keyword("module")) {
                    parse_module();
                } else {
                    syntax_error(peek(), "module", RecoveryContext::TopLevel);
                    while (!at_eof() && !peek().is_keyword("module")) advance();
                }
            }
        } catch (const FloodAbort&) {
        }
        return std::move(result_);
    }

private:
    const TokenList& toks_;
    TokenList owned_;
    bool use_owned_ = false;
    uint32_t file_;
    size_t pos_ = 0;
    size_t last_error_pos_ = static_cast<size_t>(-1);
    ParseResult result_;

    // Non-ANSI header names waiting for a body declaration.
    std::vector<std::string> pending_ports_;

    const TokenList& tokens() const { return use_owned_ ? owned_ : toks_; }
    const Token& peek(size_t ahead = 0) const {
        const auto& t = tokens();
        return pos_ + ahead < t.size() ? t[pos_ + ahead] : t.back();
    }
    const Token& previous() const { return tokens()[pos_ > 0 ? pos_ - 1 : 0]; }
    bool at_eof() const { return peek().kind == TokenKind::EndOfFile; }
    const Token& advance() {
        const Token& t = peek();
        if (!at_eof()) ++pos_;
        return t;
    }
    bool check_op(std::string_view op) const { return peek().is_op(op); }
    bool match_op(std::string_view op) {
        if (!check_op(op)) return false;
        advance();
        return true;
    }
    bool match_keyword(std::string_view kw) {
        if (!peek().is_keyword(kw)) return false;
        advance();
        return true;
    }

    void push_diag(Diagnostic d) {
        if (result_.diagnostics.size() + 1 >= kDiagnosticFloodLimit) {
            Diagnostic flood;
            flood.code = "SYN999";
            flood.severity = Severity::Error;
            flood.span = d.span;
            flood.message = "diagnostic flood: parsing stopped after " +
                            std::to_string(kDiagnosticFloodLimit - 1) + " diagnostics";
            result_.diagnostics.push_back(std::move(flood));
            throw FloodAbort{};
        }
        result_.diagnostics.push_back(std::move(d));
    }

    void syntax_error(const Token& found, std::string expected, RecoveryContext ctx,
                      std::string message = {}) {
        if (pos_ == last_error_pos_) return;  // no progress since the last report
        last_error_pos_ = pos_;
        RecoveryEvent ev;
        ev.span = found.span;
        ev.expected = expected;
        ev.found = found.kind == TokenKind::EndOfFile ? "end of file" : found.text;
        ev.context = ctx;
        result_.ast.recoveries.push_back(ev);

        Diagnostic d;
        d.code = "SYN000";
        d.severity = Severity::Error;
        d.span = found.span;
        d.message = message.empty() ? "expected '" + expected + "' but found " + describe(found)
                                    : std::move(message);
        d.hint = std::string(block_hint(ctx, expected));
        if (d.hint.empty()) d.hint = "insert '" + expected + "' or remove " + describe(found);
        push_diag(std::move(d));
    }

    bool expect_op(std::string_view op, RecoveryContext ctx) {
        if (match_op(op)) return true;
        syntax_error(peek(), std::string(op), ctx);
        return false;
    }

    std::string expect_identifier(RecoveryContext ctx, Span* span = nullptr) {
        if (peek().kind == TokenKind::Identifier) {
            if (span) *span = peek().span;
            return advance().text;
        }
        syntax_error(peek(), "identifier", ctx);
        return {};
    }

    bool at_module_boundary() const {
        return peek().is_keyword("module") || peek().is_keyword("endmodule");
    }

    static bool is_statement_sync(const Token& t) {
        if (t.kind != TokenKind::Keyword) return false;
        return t.text == "end" || t.text == "endcase" || t.text == "endmodule" ||
               t.text == "always" || t.text == "assign" || t.text == "initial" ||
               t.text == "module";
    }

    static bool is_item_start(const Token& t) {
        if (t.kind != TokenKind::Keyword) return false;
        static const std::set<std::string, std::less<>> kw = {
            "always", "assign",     "initial", "wire",   "reg",    "integer", "input",
            "output", "inout",      "parameter", "localparam", "endmodule", "module",
            "tri",    "supply0",    "supply1", "generate", "function", "task", "genvar"};
        return kw.count(t.text) != 0;
    }

    // Skips to just past the next ';' or up to a synchronizing keyword.
    void sync_statement() {
        while (!at_eof()) {
            if (check_op(";")) {
                while (check_op(";")) advance();
                return;
            }
            if (is_statement_sync(peek())) return;
            advance();
        }
    }

    void sync_item() {
        while (!at_eof()) {
            if (check_op(";")) {
                advance();
                return;
            }
            if (is_item_start(peek())) return;
            advance();
        }
    }

    // ------------------------------------------------------------------ modules

    void parse_module() {
        ModuleDecl mod;
        const Token& kw = advance();
        mod.span = kw.span;
        mod.name = expect_identifier(RecoveryContext::Module, &mod.name_span);
        pending_ports_.clear();
        if (match_op("#")) parse_param_header(mod);
        if (check_op("(")) parse_port_list(mod);
        expect_op(";", RecoveryContext::Module);

        while (!at_eof() && !peek().is_keyword("endmodule")) {
            if (peek().is_keyword("module")) break;
            parse_module_item(mod);
        }
        if (peek().is_keyword("endmodule")) {
            mod.span = Span::merge(mod.span, advance().span);
        } else {
            syntax_error(peek(), "endmodule", RecoveryContext::Module);
            mod.span = Span::merge(mod.span, previous().span);
        }
        for (const auto& name : pending_ports_) {
            Diagnostic d;
            d.code = "SYN000";
            d.severity = Severity::Error;
            d.span = mod.name_span;
            d.message = "port '" + name + "' of module '" + mod.name + "' has no direction declaration";
            d.hint = "declare it as input, output or inout";
            push_diag(std::move(d));
        }
        // Drop header names that never got a declaration.
        mod.ports.erase(std::remove_if(mod.ports.begin(), mod.ports.end(),
                                       [&](const PortDecl& p) {
                                           return std::find(pending_ports_.begin(), pending_ports_.end(),
                                                            p.name) != pending_ports_.end();
                                       }),
                        mod.ports.end());
        pending_ports_.clear();
        resolve_names(mod);
        result_.ast.modules.push_back(std::move(mod));
    }

    void parse_param_header(ModuleDecl& mod) {
        if (!expect_op("(", RecoveryContext::Module)) return;
        if (match_op(")")) return;
        bool local = false;
        std::optional<Range> range;
        do {
            if (match_keyword("parameter")) {
                local = false;
                range.reset();
                match_keyword("signed");
                if (check_op("[")) range = parse_range();
            } else if (match_keyword("localparam")) {
                local = true;
                range.reset();
                match_keyword("signed");
                if (check_op("[")) range = parse_range();
            }
            ParamDecl p;
            p.local = local;
            p.range = range;
            p.span = peek().span;
            p.name = expect_identifier(RecoveryContext::Module);
            if (p.name.empty()) break;
            if (expect_op("=", RecoveryContext::Module)) p.value = parse_expr();
            p.span = Span::merge(p.span, previous().span);
            mod.params.push_back(std::move(p));
        } while (match_op(","));
        if (!expect_op(")", RecoveryContext::Module)) {
            while (!at_eof() && !check_op(")") && !check_op(";") && !at_module_boundary()) advance();
            match_op(")");
        }
    }

    static std::optional<Direction> direction_of(const Token& t) {
        if (t.is_keyword("input")) return Direction::Input;
        if (t.is_keyword("output")) return Direction::Output;
        if (t.is_keyword("inout")) return Direction::Inout;
        return std::nullopt;
    }

    static NetType net_type_of(const Token& t) {
        if (t.is_keyword("wire") || t.is_keyword("tri") || t.is_keyword("supply0") || t.is_keyword("supply1"))
            return NetType::Wire;
        if (t.is_keyword("reg")) return NetType::Reg;
        if (t.is_keyword("integer")) return NetType::Integer;
        return NetType::None;
    }

    void parse_port_list(ModuleDecl& mod) {
        advance();  // (
        if (match_op(")")) return;
        std::optional<PortDecl> current;
        while (true) {
            if (auto dir = direction_of(peek())) {
                PortDecl p;
                p.span = advance().span;
                p.dir = *dir;
                p.net = net_type_of(peek());
                if (p.net != NetType::None) advance();
                if (match_keyword("signed")) p.is_signed = true;
                if (check_op("[")) p.range = parse_range();
                current = p;
            }
            if (peek().kind != TokenKind::Identifier) {
                syntax_error(peek(), "port name", RecoveryContext::Module);
                while (!at_eof() && !check_op(")") && !check_op(";") && !at_module_boundary()) advance();
                match_op(")");
                return;
            }
            const Token& name = advance();
            PortDecl p;
            if (current) {
                p = *current;
                p.span = Span::merge(current->span, name.span);
            } else {
                p.span = name.span;
                pending_ports_.push_back(name.text);
            }
            p.name = name.text;
            mod.ports.push_back(std::move(p));
            if (match_op(",")) continue;
            if (match_op(")")) return;
            syntax_error(peek(), ")", RecoveryContext::Module);
            while (!at_eof() && !check_op(")") && !check_op(";") && !at_module_boundary()) advance();
            match_op(")");
            return;
        }
    }

    std::optional<Range> parse_range() {
        advance();  // [
        Range r;
        r.msb = parse_expr();
        if (!expect_op(":", RecoveryContext::Expression)) {
            sync_to_bracket();
            return r;
        }
        r.lsb = parse_expr();
        if (!expect_op("]", RecoveryContext::Expression)) sync_to_bracket();
        return r;
    }

    void sync_to_bracket() {
        while (!at_eof() && !check_op("]") && !check_op(";") && !at_module_boundary()) advance();
        match_op("]");
    }

    void parse_module_item(ModuleDecl& mod) {
        const Token& t = peek();
        if (direction_of(t)) {
            parse_body_port_decl(mod);
        } else if (net_type_of(t) != NetType::None) {
            parse_net_decl(mod);
        } else if (t.is_keyword("parameter") || t.is_keyword("localparam")) {
            parse_param_decl(mod);
        } else if (t.is_keyword("assign")) {
            parse_continuous_assign(mod);
        } else if (t.is_keyword("always")) {
            parse_always(mod);
        } else if (t.is_keyword("initial")) {
            InitialBlock ib;
            ib.span = advance().span;
            ib.body = parse_statement();
            ib.span = Span::merge(ib.span, previous().span);
            mod.items.emplace_back(std::move(ib));
        } else if (t.kind == TokenKind::Identifier) {
            parse_instantiation(mod);
        } else if (t.is_keyword("generate") || t.is_keyword("function") || t.is_keyword("task")) {
            std::string closer = "end" + t.text;
            syntax_error(t, "module item", RecoveryContext::Module,
                         "'" + t.text + "' blocks are outside the supported Verilog subset");
            while (!at_eof() && !peek().is_keyword(closer) && !at_module_boundary()) advance();
            match_keyword(closer);
        } else if (t.is_op(";")) {
            syntax_error(t, "module item", RecoveryContext::Module, "unexpected ';' at module level");
            while (check_op(";")) advance();
        } else if (t.is_keyword("end") || t.is_keyword("endcase") || t.is_op("}")) {
            syntax_error(t, "module item", RecoveryContext::Module,
                         "unexpected " + describe(t) + " at module level; no open block to close");
            advance();
        } else {
            syntax_error(t, "module item", RecoveryContext::Module);
            advance();
            sync_item();
        }
    }

    void parse_body_port_decl(ModuleDecl& mod) {
        PortDecl proto;
        proto.span = peek().span;
        proto.dir = *direction_of(advance());
        proto.net = net_type_of(peek());
        if (proto.net != NetType::None) advance();
        if (match_keyword("signed")) proto.is_signed = true;
        if (check_op("[")) proto.range = parse_range();
        do {
            Span nspan;
            std::string name = expect_identifier(RecoveryContext::Module, &nspan);
            if (name.empty()) break;
            auto pending = std::find(pending_ports_.begin(), pending_ports_.end(), name);
            auto existing = std::find_if(mod.ports.begin(), mod.ports.end(),
                                         [&](const PortDecl& p) { return p.name == name; });
            if (pending == pending_ports_.end() || existing == mod.ports.end()) {
                Diagnostic d;
                d.code = "SYN000";
                d.severity = Severity::Error;
                d.span = nspan;
                d.message = "'" + name + "' is declared as a port but is not in the module port list";
                push_diag(std::move(d));
                continue;
            }
            pending_ports_.erase(pending);
            NetType keep = existing->net;
            *existing = proto;
            existing->name = name;
            if (existing->net == NetType::None) existing->net = keep;
            existing->span = Span::merge(proto.span, nspan);
        } while (match_op(","));
        if (!expect_op(";", RecoveryContext::Module)) sync_item();
    }

    void parse_net_decl(ModuleDecl& mod) {
        const Token& kw = advance();
        NetType type = net_type_of(kw);
        bool is_signed = match_keyword("signed");
        std::optional<Range> range;
        if (check_op("[")) range = parse_range();
        do {
            Span nspan;
            std::string name = expect_identifier(RecoveryContext::Module, &nspan);
            if (name.empty()) {
                sync_item();
                return;
            }
            if (check_op("[")) {
                syntax_error(peek(), ";", RecoveryContext::Module,
                             "memory arrays are outside the supported Verilog subset");
                sync_item();
                return;
            }
            std::optional<Expr> init;
            if (match_op("=")) init = parse_expr();
            // A body declaration of an existing port refines its net type.
            auto port = std::find_if(mod.ports.begin(), mod.ports.end(),
                                     [&](const PortDecl& p) { return p.name == name; });
            if (port != mod.ports.end() && port->net == NetType::None && !init) {
                port->net = type;
                if (!port->range && range) port->range = range;
                continue;
            }
            NetDecl d;
            d.name = name;
            d.type = type;
            d.is_signed = is_signed || type == NetType::Integer;
            d.range = range;
            d.init = std::move(init);
            d.span = Span::merge(kw.span, previous().span);
            mod.items.emplace_back(std::move(d));
        } while (match_op(","));
        if (!expect_op(";", RecoveryContext::Module)) sync_item();
    }

    void parse_param_decl(ModuleDecl& mod) {
        const Token& kw = advance();
        bool local = kw.text == "localparam";
        match_keyword("signed");
        std::optional<Range> range;
        if (check_op("[")) range = parse_range();
        do {
            ParamDecl p;
            p.local = local;
            p.range = range;
            p.name = expect_identifier(RecoveryContext::Module);
            if (p.name.empty()) {
                sync_item();
                return;
            }
            if (expect_op("=", RecoveryContext::Module)) p.value = parse_expr();
            p.span = Span::merge(kw.span, previous().span);
            mod.items.emplace_back(std::move(p));
        } while (match_op(","));
        if (!expect_op(";", RecoveryContext::Module)) sync_item();
    }

    void parse_continuous_assign(ModuleDecl& mod) {
        const Token& kw = advance();
        do {
            ContinuousAssign ca;
            ca.lhs = parse_lvalue();
            if (ca.lhs.kind == ExprKind::Invalid) {
                sync_item();
                return;
            }
            if (!expect_op("=", RecoveryContext::Statement)) {
                sync_item();
                return;
            }
            ca.rhs = parse_expr();
            ca.span = Span::merge(kw.span, previous().span);
            mod.items.emplace_back(std::move(ca));
        } while (match_op(","));
        if (!expect_op(";", RecoveryContext::Statement)) sync_item();
    }

    void parse_always(ModuleDecl& mod) {
        AlwaysBlock ab;
        ab.span = advance().span;
        if (check_op("@")) {
            ab.sensitivity = parse_sensitivity();
        } else {
            ab.sensitivity.kind = Sensitivity::Kind::None;
            ab.sensitivity.span = ab.span;
        }
        ab.body = parse_statement();
        ab.span = Span::merge(ab.span, previous().span);
        mod.items.emplace_back(std::move(ab));
    }

    Sensitivity parse_sensitivity() {
        Sensitivity s;
        s.span = advance().span;  // @
        if (check_op("*")) {
            s.kind = Sensitivity::Kind::Star;
            s.span = Span::merge(s.span, advance().span);
            return s;
        }
        if (peek().kind == TokenKind::Identifier) {
            s.kind = Sensitivity::Kind::List;
            EdgeEvent ev;
            ev.edge = EdgeKind::Level;
            ev.span = peek().span;
            ev.signal = advance().text;
            s.events.push_back(ev);
            s.span = Span::merge(s.span, ev.span);
            return s;
        }
        if (!expect_op("(", RecoveryContext::Statement)) return s;
        if (check_op("*")) {
            advance();
            s.kind = Sensitivity::Kind::Star;
            expect_op(")", RecoveryContext::Statement);
            s.span = Span::merge(s.span, previous().span);
            return s;
        }
        s.kind = Sensitivity::Kind::List;
        while (true) {
            EdgeEvent ev;
            ev.span = peek().span;
            if (match_keyword("posedge")) {
                ev.edge = EdgeKind::Posedge;
            } else if (match_keyword("negedge")) {
                ev.edge = EdgeKind::Negedge;
            } else {
                ev.edge = EdgeKind::Level;
            }
            ev.signal = expect_identifier(RecoveryContext::Statement);
            if (ev.signal.empty()) {
                while (!at_eof() && !check_op(")") && !is_statement_sync(peek())) advance();
                match_op(")");
                break;
            }
            ev.span = Span::merge(ev.span, previous().span);
            s.events.push_back(ev);
            if (match_op(",") || match_keyword("or")) continue;
            expect_op(")", RecoveryContext::Statement);
            break;
        }
        s.span = Span::merge(s.span, previous().span);
        return s;
    }

    void parse_instantiation(ModuleDecl& mod) {
        const Token& modname = advance();
        std::vector<Connection> params;
        if (match_op("#")) {
            if (!expect_op("(", RecoveryContext::Module)) {
                sync_item();
                return;
            }
            params = parse_connections();
        }
        do {
            Instantiation inst;
            inst.module_name = modname.text;
            inst.params = params;
            inst.span = modname.span;
            inst.instance_name = expect_identifier(RecoveryContext::Module);
            if (inst.instance_name.empty()) {
                sync_item();
                return;
            }
            if (!expect_op("(", RecoveryContext::Module)) {
                sync_item();
                return;
            }
            inst.ports = parse_connections();
            inst.span = Span::merge(inst.span, previous().span);
            mod.items.emplace_back(std::move(inst));
        } while (match_op(","));
        if (!expect_op(";", RecoveryContext::Module)) sync_item();
    }

    // After '(' up to and including ')'.
    std::vector<Connection> parse_connections() {
        std::vector<Connection> out;
        if (match_op(")")) return out;
        while (true) {
            Connection c;
            c.span = peek().span;
            if (match_op(".")) {
                c.port = expect_identifier(RecoveryContext::Module);
                if (expect_op("(", RecoveryContext::Module)) {
                    if (!check_op(")")) c.expr = parse_expr();
                    expect_op(")", RecoveryContext::Module);
                }
            } else if (check_op(",") || check_op(")")) {
                // empty positional slot
            } else {
                c.expr = parse_expr();
            }
            c.span = Span::merge(c.span, previous().span);
            out.push_back(std::move(c));
            if (match_op(",")) continue;
            if (match_op(")")) break;
            syntax_error(peek(), ")", RecoveryContext::Module);
            while (!at_eof() && !check_op(")") && !check_op(";") && !is_item_start(peek())) advance();
            match_op(")");
            break;
        }
        return out;
    }

    // --------------------------------------------------------------- statements

    Statement invalid_statement(const Span& span) {
        Statement s;
        s.kind = StmtKind::Invalid;
        s.span = span;
        return s;
    }

    Statement parse_statement() {
        const Token& t = peek();
        if (t.is_keyword("begin")) return parse_block();
        if (t.is_keyword("if")) return parse_if();
        if (t.is_keyword("case") || t.is_keyword("casez") || t.is_keyword("casex")) return parse_case();
        if (t.is_op("#")) {
            Statement s;
            s.kind = StmtKind::Delay;
            s.span = advance().span;
            s.value = parse_primary();
            if (check_op(";")) {
                Statement null_stmt;
                null_stmt.span = advance().span;
                s.body.push_back(std::move(null_stmt));
            } else {
                s.body.push_back(parse_statement());
            }
            s.span = Span::merge(s.span, previous().span);
            return s;
        }
        if (t.is_op(";")) {
            Statement s;
            s.kind = StmtKind::Null;
            s.span = advance().span;
            return s;
        }
        if (t.kind == TokenKind::SystemIdentifier) {
            Statement s;
            s.kind = StmtKind::SystemCall;
            s.span = t.span;
            s.name = advance().text;
            if (match_op("(")) {
                if (!check_op(")")) {
                    do {
                        if (peek().kind == TokenKind::StringLiteral) {
                            Expr e;
                            e.kind = ExprKind::Number;
                            e.text = peek().text;
                            e.span = advance().span;
                            s.args.push_back(std::move(e));
                        } else {
                            s.args.push_back(parse_expr());
                        }
                    } while (match_op(","));
                }
                expect_op(")", RecoveryContext::Statement);
            }
            if (!expect_op(";", RecoveryContext::Statement)) sync_statement();
            s.span = Span::merge(s.span, previous().span);
            return s;
        }
        if (t.kind == TokenKind::Identifier || t.is_op("{") || t.kind == TokenKind::MacroUse)
            return parse_assignment();
        if (t.is_keyword("for") || t.is_keyword("while") || t.is_keyword("repeat") || t.is_keyword("forever")) {
            Span at = t.span;
            syntax_error(t, "statement", RecoveryContext::Statement,
                         "'" + t.text + "' loops are outside the supported Verilog subset");
            advance();
            sync_statement();
            return invalid_statement(at);
        }
        Span at = t.span;
        syntax_error(t, "statement", RecoveryContext::Statement);
        if (!is_statement_sync(peek()) && !check_op("}")) advance();
        sync_statement();
        return invalid_statement(at);
    }

    Statement parse_assignment() {
        Statement s;
        s.span = peek().span;
        s.target = parse_lvalue();
        if (s.target.kind == ExprKind::Invalid) {
            sync_statement();
            return invalid_statement(s.span);
        }
        if (match_op("=")) {
            s.kind = StmtKind::Blocking;
        } else if (match_op("<=")) {
            s.kind = StmtKind::Nonblocking;
        } else {
            syntax_error(peek(), "=", RecoveryContext::Statement,
                         "expected '=' or '<=' after assignment target but found " + describe(peek()));
            sync_statement();
            return invalid_statement(s.span);
        }
        if (check_op("#")) {
            // Intra-assignment delay: keep the assignment, record the delay.
            Statement d;
            d.kind = StmtKind::Delay;
            d.span = advance().span;
            d.value = parse_primary();
            s.value = parse_expr();
            s.span = Span::merge(s.span, previous().span);
            if (!expect_op(";", RecoveryContext::Statement)) sync_statement();
            d.body.push_back(std::move(s));
            d.span = Span::merge(d.span, previous().span);
            return d;
        }
        s.value = parse_expr();
        s.span = Span::merge(s.span, previous().span);
        if (!expect_op(";", RecoveryContext::Statement)) {
            if (!is_statement_sync(peek())) sync_statement();
        }
        return s;
    }

    Statement parse_block() {
        Statement s;
        s.kind = StmtKind::Block;
        s.span = advance().span;
        if (match_op(":")) s.name = expect_identifier(RecoveryContext::Block);
        while (true) {
            const Token& t = peek();
            if (t.is_keyword("end")) {
                s.span = Span::merge(s.span, advance().span);
                if (match_op(":")) expect_identifier(RecoveryContext::Block);
                break;
            }
            if (t.is_op("}")) {
                // Treated as the intended 'end' so the rest of the module parses.
                syntax_error(t, "end", RecoveryContext::Block);
                s.span = Span::merge(s.span, advance().span);
                break;
            }
            if (at_eof() || t.is_keyword("endmodule") || t.is_keyword("endcase") ||
                t.is_keyword("always") || t.is_keyword("assign") || t.is_keyword("initial") ||
                t.is_keyword("module")) {
                syntax_error(t, "end", RecoveryContext::Block);
                break;
            }
            size_t before = pos_;
            s.body.push_back(parse_statement());
            if (pos_ == before && !is_statement_sync(peek())) advance();
        }
        return s;
    }

    Statement parse_if() {
        Statement s;
        s.kind = StmtKind::If;
        s.span = advance().span;
        if (expect_op("(", RecoveryContext::Statement)) {
            s.value = parse_expr();
            expect_op(")", RecoveryContext::Statement);
        }
        s.body.push_back(parse_statement());
        if (match_keyword("else")) s.else_body.push_back(parse_statement());
        s.span = Span::merge(s.span, previous().span);
        return s;
    }

    Statement parse_case() {
        Statement s;
        s.kind = StmtKind::Case;
        const Token& kw = advance();
        s.span = kw.span;
        s.case_kind = kw.text == "casez" ? CaseKind::Casez : kw.text == "casex" ? CaseKind::Casex : CaseKind::Case;
        if (expect_op("(", RecoveryContext::Statement)) {
            if (check_op(")")) {
                syntax_error(peek(), "expression", RecoveryContext::Expression,
                             "case statement has an empty selector expression");
                s.value.span = peek().span;
            } else {
                s.value = parse_expr();
            }
            expect_op(")", RecoveryContext::Statement);
        }
        while (true) {
            const Token& t = peek();
            if (t.is_keyword("endcase")) {
                s.span = Span::merge(s.span, advance().span);
                break;
            }
            if (t.is_keyword("end")) {
                syntax_error(t, "endcase", RecoveryContext::Case);
                s.span = Span::merge(s.span, advance().span);
                break;
            }
            if (at_eof() || t.is_keyword("endmodule")) {
                syntax_error(t, "endcase", RecoveryContext::Case);
                break;
            }
            if (t.is_keyword("always") || t.is_keyword("assign") || t.is_keyword("initial") ||
                t.is_keyword("module")) {
                syntax_error(t, "endcase", RecoveryContext::Statement);
                break;
            }
            if (t.is_op(";")) {
                syntax_error(t, "case item", RecoveryContext::Statement, "stray ';' in case item list");
                while (check_op(";")) advance();
                continue;
            }
            CaseItem item;
            item.span = t.span;
            if (match_keyword("default")) {
                item.is_default = true;
                match_op(":");
            } else {
                do {
                    item.labels.push_back(parse_expr());
                } while (match_op(","));
                if (!match_op(":")) {
                    syntax_error(peek(), ":", RecoveryContext::Statement,
                                 "expected ':' after case item label but found " + describe(peek()));
                    sync_statement();
                    continue;
                }
            }
            size_t before = pos_;
            item.body.push_back(parse_statement());
            if (pos_ == before && !is_statement_sync(peek())) advance();
            item.span = Span::merge(item.span, previous().span);
            s.items.push_back(std::move(item));
        }
        return s;
    }

    // -------------------------------------------------------------- expressions

    Expr invalid_expr(const Span& span) {
        Expr e;
        e.kind = ExprKind::Invalid;
        e.span = span;
        return e;
    }

    Expr parse_lvalue() {
        const Token& t = peek();
        if (t.kind == TokenKind::Identifier) return parse_identifier_ref();
        if (t.kind == TokenKind::MacroUse) {
            Expr e;
            e.kind = ExprKind::MacroRef;
            e.name = std::string(t.macro_name());
            e.span = advance().span;
            return e;
        }
        if (t.is_op("{")) {
            Expr e;
            e.kind = ExprKind::Concat;
            e.span = advance().span;
            do {
                Expr part = parse_lvalue();
                if (part.kind == ExprKind::Invalid) return part;
                e.operands.push_back(std::move(part));
            } while (match_op(","));
            if (!expect_op("}", RecoveryContext::Expression)) return invalid_expr(e.span);
            e.span = Span::merge(e.span, previous().span);
            return e;
        }
        syntax_error(t, "assignment target", RecoveryContext::Statement);
        return invalid_expr(t.span);
    }

    Expr parse_identifier_ref() {
        Expr e;
        e.kind = ExprKind::Identifier;
        e.span = peek().span;
        e.name = advance().text;
        if (check_op("[")) {
            advance();
            Expr first = parse_expr();
            if (match_op(":")) {
                Expr second = parse_expr();
                e.kind = ExprKind::PartSelect;
                e.operands.push_back(std::move(first));
                e.operands.push_back(std::move(second));
            } else {
                e.kind = ExprKind::BitSelect;
                e.operands.push_back(std::move(first));
            }
            if (!expect_op("]", RecoveryContext::Expression)) sync_to_bracket();
            e.span = Span::merge(e.span, previous().span);
        }
        return e;
    }

    Expr parse_expr() {
        Expr cond = parse_binary(1);
        if (check_op("?")) {
            advance();
            Expr e;
            e.kind = ExprKind::Ternary;
            Expr then_e = parse_expr();
            expect_op(":", RecoveryContext::Expression);
            Expr else_e = parse_expr();
            e.span = Span::merge(cond.span, else_e.span);
            e.operands.push_back(std::move(cond));
            e.operands.push_back(std::move(then_e));
            e.operands.push_back(std::move(else_e));
            return e;
        }
        return cond;
    }

    Expr parse_binary(int min_prec) {
        Expr lhs = parse_unary();
        while (true) {
            int prec = binary_precedence(peek());
            if (prec < min_prec) break;
            std::string op = advance().text;
            Expr rhs = parse_binary(prec + 1);
            Expr e;
            e.kind = ExprKind::Binary;
            e.op = std::move(op);
            e.span = Span::merge(lhs.span, rhs.span);
            e.operands.push_back(std::move(lhs));
            e.operands.push_back(std::move(rhs));
            lhs = std::move(e);
        }
        return lhs;
    }

    Expr parse_unary() {
        if (is_unary_op(peek())) {
            Expr e;
            e.kind = ExprKind::Unary;
            e.span = peek().span;
            e.op = advance().text;
            e.operands.push_back(parse_unary());
            e.span = Span::merge(e.span, e.operands[0].span);
            return e;
        }
        return parse_primary();
    }

    Expr parse_primary() {
        const Token& t = peek();
        if (t.kind == TokenKind::SizedLiteral || t.kind == TokenKind::UnsizedLiteral) {
            Expr e;
            e.kind = ExprKind::Number;
            e.text = t.text;
            e.literal = t.literal;
            e.span = advance().span;
            return e;
        }
        if (t.kind == TokenKind::Identifier) return parse_identifier_ref();
        if (t.kind == TokenKind::MacroUse) {
            Expr e;
            e.kind = ExprKind::MacroRef;
            e.name = std::string(t.macro_name());
            e.span = advance().span;
            return e;
        }
        if (t.is_op("(")) {
            advance();
            Expr inner = parse_expr();
            expect_op(")", RecoveryContext::Expression);
            return inner;
        }
        if (t.is_op("{")) {
            Span open = advance().span;
            Expr first = parse_expr();
            if (check_op("{")) {
                Expr e;
                e.kind = ExprKind::Replicate;
                e.operands.push_back(std::move(first));
                advance();
                do {
                    e.operands.push_back(parse_expr());
                } while (match_op(","));
                expect_op("}", RecoveryContext::Expression);
                expect_op("}", RecoveryContext::Expression);
                e.span = Span::merge(open, previous().span);
                return e;
            }
            Expr e;
            e.kind = ExprKind::Concat;
            e.operands.push_back(std::move(first));
            while (match_op(",")) e.operands.push_back(parse_expr());
            expect_op("}", RecoveryContext::Expression);
            e.span = Span::merge(open, previous().span);
            return e;
        }
        syntax_error(t, "expression", RecoveryContext::Expression);
        return invalid_expr(t.span);
    }

    // ----------------------------------------------------------- name binding

    void resolve_names(const ModuleDecl& mod) {
        std::set<std::string, std::less<>> declared;
        for (const auto& p : mod.ports) declared.insert(p.name);
        for (const auto& p : mod.params) declared.insert(p.name);
        for (const auto& item : mod.items) {
            if (auto n = std::get_if<NetDecl>(&item)) declared.insert(n->name);
            if (auto p = std::get_if<ParamDecl>(&item)) declared.insert(p->name);
        }

        std::map<std::string, std::vector<Span>> unresolved;
        std::vector<std::string> order;
        auto use = [&](const std::string& name, const Span& span) {
            if (name.empty() || declared.count(name)) return;
            auto [it, fresh] = unresolved.try_emplace(name);
            if (fresh) order.push_back(name);
            it->second.push_back(span);
        };
        auto expr = [&](const Expr& e) {
            for_each_expr(e, [&](const Expr& x) {
                if (x.kind == ExprKind::Identifier || x.kind == ExprKind::BitSelect ||
                    x.kind == ExprKind::PartSelect)
                    use(x.name, x.span);
            });
        };
        auto stmt = [&](const Statement& s) {
            for_each_statement(s, [&](const Statement& st) {
                expr(st.target);
                if (st.kind != StmtKind::SystemCall) expr(st.value);
                for (const auto& a : st.args)
                    if (a.text.empty() || a.text[0] != '"') expr(a);
                for (const auto& item : st.items)
                    for (const auto& l : item.labels) expr(l);
            });
        };
        auto range = [&](const std::optional<Range>& r) {
            if (r) {
                expr(r->msb);
                expr(r->lsb);
            }
        };
        for (const auto& p : mod.ports) range(p.range);
        for (const auto& p : mod.params) {
            range(p.range);
            expr(p.value);
        }
        for (const auto& item : mod.items) {
            std::visit(
                [&](const auto& it) {
                    using T = std::decay_t<decltype(it)>;
                    if constexpr (std::is_same_v<T, NetDecl>) {
                        range(it.range);
                        if (it.init) expr(*it.init);
                    } else if constexpr (std::is_same_v<T, ParamDecl>) {
                        range(it.range);
                        expr(it.value);
                    } else if constexpr (std::is_same_v<T, ContinuousAssign>) {
                        expr(it.lhs);
                        expr(it.rhs);
                    } else if constexpr (std::is_same_v<T, AlwaysBlock>) {
                        for (const auto& ev : it.sensitivity.events) use(ev.signal, ev.span);
                        stmt(it.body);
                    } else if constexpr (std::is_same_v<T, InitialBlock>) {
                        stmt(it.body);
                    } else if constexpr (std::is_same_v<T, Instantiation>) {
                        for (const auto& c : it.params)
                            if (c.expr) expr(*c.expr);
                        for (const auto& c : it.ports)
                            if (c.expr) expr(*c.expr);
                    }
                },
                item);
        }
        for (const auto& name : order) {
            const auto& spans = unresolved[name];
            Diagnostic d;
            d.code = "SEM001";
            d.severity = Severity::Error;
            d.span = spans.front();
            d.message = "unresolved reference '" + name + "' in module '" + mod.name + "'";
            d.hint = "declare '" + name + "' as a port, wire, reg or parameter";
            d.related.assign(spans.begin() + 1, spans.end());
            push_diag(std::move(d));
        }
    }
};

}  // namespace

ParseResult parse(const TokenList& tokens, uint32_t file_id) {
    return Parser(tokens, file_id).run();
}

ParseResult parse_source(std::string_view text, uint32_t file_id, const MacroTable& defines) {
    LexResult lexed = tokenize(text, file_id);
    PreprocessResult pp = preprocess(lexed.tokens, defines);
    ParseResult result = parse(pp.tokens, file_id);
    std::vector<Diagnostic> all = std::move(lexed.diagnostics);
    for (auto& d : pp.diagnostics) all.push_back(std::move(d));
    for (auto& d : result.diagnostics) all.push_back(std::move(d));
    sort_diagnostics(all);
    result.diagnostics = std::move(all);
    result.macros = std::move(pp.macros);
    return result;
}

}  // namespace veriloop::frontend
