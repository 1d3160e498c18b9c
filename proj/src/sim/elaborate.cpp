// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <functional>
#include <map>
#include <queue>
#include <set>

#include "program.hpp"
#include "veriloop/frontend/consteval.hpp"
#include "veriloop/frontend/printer.hpp"
#include "veriloop/sim/sim.hpp"

namespace veriloop::sim {

using namespace frontend;
using detail::BitRange;
using detail::LvalPart;
using detail::Node;
using detail::Op;
using detail::Process;
using detail::Program;
using detail::SOp;
using detail::Stmt;

const SignalInfo* ElaboratedDesign::find(std::string_view name) const {
    for (const auto& s : signals)
        if (s.name == name) return &s;
    return nullptr;
}

namespace {

constexpr int kMaxDepth = 64;

struct SigDecl {
    uint32_t slot = 0;
    uint32_t width = 1;
    int64_t msb = 0;
    int64_t lsb = 0;

    // Storage offset of declared bit index i, or nullopt when outside the range.
    std::optional<uint32_t> offset(int64_t i) const {
        int64_t off = msb >= lsb ? i - lsb : lsb - i;
        if (off < 0 || off >= static_cast<int64_t>(width)) return std::nullopt;
        return static_cast<uint32_t>(off);
    }
};

struct Scope {
    std::string path;    // "" for the top, "u_a.u_b" below
    std::string prefix;  // path plus a trailing dot, or ""
    const ModuleDecl* decl = nullptr;
    ParamEnv env;
    WidthTable widths;  // signals and parameters
    std::map<std::string, SigDecl, std::less<>> sigs;
};

struct PortSlot {
    uint32_t slot;
    uint32_t width;
};

const Statement* leading_if(const Statement& s) {
    if (s.kind == StmtKind::If) return &s;
    if (s.kind == StmtKind::Block && !s.body.empty()) return leading_if(s.body.front());
    return nullptr;
}

bool mentions(const Expr& e, std::string_view name) {
    bool hit = false;
    for_each_expr(e, [&](const Expr& x) {
        if (x.kind == ExprKind::Identifier && x.name == name) hit = true;
    });
    return hit;
}

class Elaborator {
public:
    Elaborator(const std::vector<const Ast*>& asts, ElaboratedDesign& design, Program& prog)
        : design_(design), prog_(prog) {
        for (const Ast* a : asts)
            for (const auto& m : a->modules) modules_.emplace(m.name, &m);
    }

    void run(std::string_view top) {
        auto it = modules_.find(std::string(top));
        if (it == modules_.end()) throw SimError("top module '" + std::string(top) + "' is not defined");
        instantiate(*it->second, "", {}, {}, 0, true);
        for (const auto& p : it->second->ports) top_ports_.push_back(p.name);
        order_comb();
        assign_kinds();
    }

    std::vector<std::string> top_ports_;

private:
    ElaboratedDesign& design_;
    Program& prog_;
    std::map<std::string, const ModuleDecl*> modules_;
    std::vector<std::string> slot_names_;
    std::vector<Process> comb_;
    std::vector<ProcessInfo> comb_info_;
    std::set<std::string> warned_;

    void warn(const std::string& key, const Span& span, const std::string& msg) {
        if (!warned_.insert(key).second) return;
        Diagnostic d;
        d.code = "SIM002";
        d.severity = Severity::Warning;
        d.span = span;
        d.message = msg;
        design_.warnings.push_back(std::move(d));
    }

    uint32_t new_slot(uint32_t width, const std::string& name) {
        prog_.slot_width.push_back(width);
        slot_names_.push_back(name);
        return prog_.slot_count++;
    }

    void declare(Scope& sc, const std::string& name, const std::optional<Range>& range, const Span& span,
                 std::optional<PortSlot> alias, NetType net) {
        SigDecl sd;
        if (net == NetType::Integer && !range) {
            sd.msb = 31;
            sd.lsb = 0;
        } else if (range) {
            auto m = eval_const(range->msb, sc.env), l = eval_const(range->lsb, sc.env);
            if (!m || !l) throw SimError("range of '" + name + "' is not constant", span);
            sd.msb = static_cast<int64_t>(*m);
            sd.lsb = static_cast<int64_t>(*l);
        }
        uint64_t w = static_cast<uint64_t>(std::llabs(sd.msb - sd.lsb)) + 1;
        if (w > 64) throw SimError("'" + name + "' is wider than 64 bits, which the simulator does not support", span);
        sd.width = static_cast<uint32_t>(w);
        if (alias) {
            if (alias->width != sd.width) throw SimError("internal: alias width mismatch for '" + name + "'", span);
            sd.slot = alias->slot;
        } else {
            sd.slot = new_slot(sd.width, sc.prefix + name);
        }
        sc.sigs[name] = sd;
        sc.widths[name] = sd.width;
        design_.signals.push_back({sc.prefix + name, sd.width, SignalKind::Comb, sd.slot});
    }

    // ---- expressions ------------------------------------------------------

    uint64_t literal_value(const Expr& e) {
        uint64_t v = e.literal.value;
        if (e.literal.xz_mask) {
            warn("xz", e.span, "x/z bits in '" + e.text + "' are simulated as 0");
            v &= ~e.literal.xz_mask;
        }
        return v & width_mask(e.literal.width);
    }

    static void add_read(std::vector<BitRange>* reads, uint32_t slot, uint32_t lo, uint32_t hi) {
        if (reads) reads->push_back({slot, lo, hi});
    }

    Node constant(uint64_t v, uint32_t w) {
        Node n;
        n.op = Op::Const;
        n.width = w;
        n.value = v & width_mask(w);
        return n;
    }

    Node compile(const Expr& e, uint32_t ctx, Scope& sc, std::vector<BitRange>* reads) {
        uint32_t self = self_width(e, sc.widths, sc.env);
        uint32_t W = std::min<uint32_t>(64, std::max(ctx, self));
        auto sub_self = [&](const Expr& x) { return compile(x, 0, sc, reads); };
        auto sub_ctx = [&](const Expr& x, uint32_t w) { return compile(x, w, sc, reads); };
        Node n;
        n.width = W;
        switch (e.kind) {
        case ExprKind::Number: return constant(literal_value(e), W);
        case ExprKind::Identifier: {
            if (auto it = sc.sigs.find(e.name); it != sc.sigs.end()) {
                n.op = Op::Sig;
                n.slot = it->second.slot;
                add_read(reads, n.slot, 0, it->second.width - 1);
                return n;
            }
            if (auto it = sc.env.find(e.name); it != sc.env.end())
                return constant(it->second & width_mask(sc.widths.count(e.name) ? sc.widths.at(e.name) : 32), W);
            throw SimError("unknown identifier '" + e.name + "'", e.span);
        }
        case ExprKind::BitSelect:
        case ExprKind::PartSelect: {
            auto it = sc.sigs.find(e.name);
            if (it == sc.sigs.end()) {
                // Select of a parameter folds to a constant.
                auto v = eval_const(e, sc.env);
                if (!v) throw SimError("cannot select from '" + e.name + "'", e.span);
                return constant(*v, W);
            }
            const SigDecl& sd = it->second;
            if (e.kind == ExprKind::BitSelect) {
                if (auto idx = eval_const(e.operands.at(0), sc.env)) {
                    auto off = sd.offset(static_cast<int64_t>(*idx));
                    if (!off) return constant(0, W);
                    n.op = Op::Slice;
                    n.slot = sd.slot;
                    n.lo = *off;
                    n.widths = {1};
                    add_read(reads, sd.slot, *off, *off);
                    return n;
                }
                n.op = Op::DynBit;
                n.slot = sd.slot;
                n.base = static_cast<uint32_t>(sd.lsb);
                n.descending = sd.msb >= sd.lsb;
                n.widths = {sd.width};
                n.kids.push_back(sub_self(e.operands[0]));
                add_read(reads, sd.slot, 0, sd.width - 1);
                return n;
            }
            auto m = eval_const(e.operands.at(0), sc.env), l = eval_const(e.operands.at(1), sc.env);
            if (!m || !l) throw SimError("part-select bounds of '" + e.name + "' are not constant", e.span);
            auto om = sd.offset(static_cast<int64_t>(*m)), ol = sd.offset(static_cast<int64_t>(*l));
            if (!om || !ol) throw SimError("part-select of '" + e.name + "' is out of range", e.span);
            n.op = Op::Slice;
            n.slot = sd.slot;
            n.lo = std::min(*om, *ol);
            n.widths = {std::max(*om, *ol) - n.lo + 1};
            add_read(reads, sd.slot, n.lo, std::max(*om, *ol));
            return n;
        }
        case ExprKind::MacroRef: throw SimError("undefined macro '`" + e.name + "'", e.span);
        case ExprKind::Unary: {
            const std::string& op = e.op;
            if (op == "+") return sub_ctx(e.operands.at(0), W);
            if (op == "~" || op == "-") {
                n.op = op == "~" ? Op::Not : Op::Neg;
                n.kids.push_back(sub_ctx(e.operands.at(0), W));
                return n;
            }
            n.width = std::max<uint32_t>(1, W);
            Node k = sub_self(e.operands.at(0));
            n.widths = {self_width(e.operands[0], sc.widths, sc.env)};
            if (op == "!") n.op = Op::LNot;
            else if (op == "&") n.op = Op::RedAnd;
            else if (op == "|") n.op = Op::RedOr;
            else if (op == "^") n.op = Op::RedXor;
            else if (op == "~&") n.op = Op::RedNand;
            else if (op == "~|") n.op = Op::RedNor;
            else if (op == "~^" || op == "^~") n.op = Op::RedXnor;
            else throw SimError("unsupported unary operator '" + op + "'", e.span);
            n.kids.push_back(std::move(k));
            return n;
        }
        case ExprKind::Binary: {
            static const std::map<std::string, Op, std::less<>> ctx_ops = {
                {"+", Op::Add}, {"-", Op::Sub}, {"*", Op::Mul}, {"/", Op::Div}, {"%", Op::Mod},
                {"&", Op::And}, {"|", Op::Or},  {"^", Op::Xor}, {"~^", Op::Xnor}, {"^~", Op::Xnor}};
            static const std::map<std::string, Op, std::less<>> cmp_ops = {
                {"<", Op::Lt},  {"<=", Op::Le}, {">", Op::Gt},   {">=", Op::Ge},
                {"==", Op::Eq}, {"!=", Op::Ne}, {"===", Op::Eq}, {"!==", Op::Ne}};
            const std::string& op = e.op;
            if (auto it = ctx_ops.find(op); it != ctx_ops.end()) {
                n.op = it->second;
                n.kids.push_back(sub_ctx(e.operands.at(0), W));
                n.kids.push_back(sub_ctx(e.operands.at(1), W));
                return n;
            }
            if (op == "<<" || op == "<<<" || op == ">>" || op == ">>>" || op == "**") {
                n.op = op == "**" ? Op::Pow : (op[0] == '<' ? Op::Shl : Op::Shr);
                n.kids.push_back(sub_ctx(e.operands.at(0), W));
                n.kids.push_back(sub_self(e.operands.at(1)));
                return n;
            }
            if (auto it = cmp_ops.find(op); it != cmp_ops.end()) {
                uint32_t w = std::min<uint32_t>(64, std::max(self_width(e.operands.at(0), sc.widths, sc.env),
                                                             self_width(e.operands.at(1), sc.widths, sc.env)));
                n.op = it->second;
                n.kids.push_back(sub_ctx(e.operands[0], w));
                n.kids.push_back(sub_ctx(e.operands[1], w));
                return n;
            }
            if (op == "&&" || op == "||") {
                n.op = op == "&&" ? Op::LAnd : Op::LOr;
                n.kids.push_back(sub_self(e.operands.at(0)));
                n.kids.push_back(sub_self(e.operands.at(1)));
                return n;
            }
            throw SimError("unsupported binary operator '" + op + "'", e.span);
        }
        case ExprKind::Ternary:
            n.op = Op::Ternary;
            n.kids.push_back(sub_self(e.operands.at(0)));
            n.kids.push_back(sub_ctx(e.operands.at(1), W));
            n.kids.push_back(sub_ctx(e.operands.at(2), W));
            return n;
        case ExprKind::Concat: {
            if (self > 64) throw SimError("concatenation wider than 64 bits", e.span);
            n.op = Op::Concat;
            for (const auto& x : e.operands) {
                n.widths.push_back(self_width(x, sc.widths, sc.env));
                n.kids.push_back(sub_self(x));
            }
            return n;
        }
        case ExprKind::Replicate: {
            if (self > 64) throw SimError("replication wider than 64 bits", e.span);
            auto count = eval_const(e.operands.at(0), sc.env);
            if (!count) throw SimError("replication count is not constant", e.span);
            n.op = Op::Repl;
            n.value = *count;
            Node item;
            item.op = Op::Concat;
            uint32_t iw = 0;
            for (size_t i = 1; i < e.operands.size(); ++i) {
                uint32_t w = self_width(e.operands[i], sc.widths, sc.env);
                item.widths.push_back(w);
                item.kids.push_back(sub_self(e.operands[i]));
                iw += w;
            }
            item.width = std::max<uint32_t>(1, iw);
            n.widths = {iw};
            n.kids.push_back(std::move(item));
            return n;
        }
        case ExprKind::Invalid: break;
        }
        throw SimError("expression cannot be simulated", e.span);
    }

    void compile_lvalue(const Expr& e, Scope& sc, std::vector<LvalPart>& out, std::vector<BitRange>& writes,
                        std::vector<BitRange>* reads) {
        if (e.kind == ExprKind::Concat) {
            for (const auto& x : e.operands) compile_lvalue(x, sc, out, writes, reads);
            return;
        }
        auto it = sc.sigs.find(e.name);
        if (it == sc.sigs.end() ||
            (e.kind != ExprKind::Identifier && e.kind != ExprKind::BitSelect && e.kind != ExprKind::PartSelect))
            throw SimError("cannot assign to '" + (e.name.empty() ? to_string(e) : e.name) + "'", e.span);
        const SigDecl& sd = it->second;
        LvalPart p;
        p.slot = sd.slot;
        p.slot_width = sd.width;
        if (e.kind == ExprKind::Identifier) {
            p.width = sd.width;
        } else if (e.kind == ExprKind::BitSelect) {
            p.width = 1;
            if (auto idx = eval_const(e.operands.at(0), sc.env)) {
                auto off = sd.offset(static_cast<int64_t>(*idx));
                if (!off) throw SimError("bit-select of '" + e.name + "' is out of range", e.span);
                p.lo = *off;
            } else {
                p.dyn_index = compile(e.operands[0], 0, sc, reads);
                p.base = static_cast<uint32_t>(sd.lsb);
                p.descending = sd.msb >= sd.lsb;
            }
        } else {
            auto m = eval_const(e.operands.at(0), sc.env), l = eval_const(e.operands.at(1), sc.env);
            if (!m || !l) throw SimError("part-select bounds of '" + e.name + "' are not constant", e.span);
            auto om = sd.offset(static_cast<int64_t>(*m)), ol = sd.offset(static_cast<int64_t>(*l));
            if (!om || !ol) throw SimError("part-select of '" + e.name + "' is out of range", e.span);
            p.lo = std::min(*om, *ol);
            p.width = std::max(*om, *ol) - p.lo + 1;
        }
        if (p.dyn_index)
            writes.push_back({p.slot, 0, sd.width - 1});
        else
            writes.push_back({p.slot, p.lo, p.lo + p.width - 1});
        out.push_back(std::move(p));
    }

    static uint32_t lhs_width(const std::vector<LvalPart>& parts) {
        uint32_t w = 0;
        for (const auto& p : parts) w += p.width;
        return w;
    }

    // ---- statements -------------------------------------------------------

    Stmt compile_stmt(const Statement& s, Scope& sc, Process& proc) {
        Stmt out;
        switch (s.kind) {
        case StmtKind::Null:
        case StmtKind::SystemCall: return out;
        case StmtKind::Blocking:
        case StmtKind::Nonblocking: {
            out.op = s.kind == StmtKind::Blocking ? SOp::Assign : SOp::NbAssign;
            compile_lvalue(s.target, sc, out.lhs, proc.writes, &proc.reads);
            uint32_t w = lhs_width(out.lhs);
            if (w > 64) throw SimError("assignment target wider than 64 bits", s.span);
            out.rhs = compile(s.value, w, sc, &proc.reads);
            return out;
        }
        case StmtKind::If:
            out.op = SOp::If;
            out.rhs = compile(s.value, 0, sc, &proc.reads);
            for (const auto& b : s.body) out.body.push_back(compile_stmt(b, sc, proc));
            for (const auto& b : s.else_body) out.else_body.push_back(compile_stmt(b, sc, proc));
            return out;
        case StmtKind::Case: {
            out.op = SOp::Case;
            uint32_t w = self_width(s.value, sc.widths, sc.env);
            for (const auto& item : s.items)
                for (const auto& l : item.labels) w = std::max(w, self_width(l, sc.widths, sc.env));
            w = std::min<uint32_t>(w, 64);
            out.rhs = compile(s.value, w, sc, &proc.reads);
            for (size_t i = 0; i < s.items.size(); ++i) {
                const CaseItem& item = s.items[i];
                detail::CaseArm arm;
                for (const auto& l : item.labels) {
                    detail::CaseLabel lab;
                    if (l.kind == ExprKind::Number && l.literal.xz_mask) {
                        if (s.case_kind == CaseKind::Case)
                            lab.never = true;
                        else
                            lab.care = ~l.literal.xz_mask;
                        Expr clean = l;
                        clean.literal.xz_mask = 0;
                        clean.literal.value &= ~l.literal.xz_mask;
                        lab.expr = compile(clean, w, sc, &proc.reads);
                    } else {
                        lab.expr = compile(l, w, sc, &proc.reads);
                    }
                    arm.labels.push_back(std::move(lab));
                }
                for (const auto& b : item.body) arm.body.push_back(compile_stmt(b, sc, proc));
                if (item.is_default) out.default_arm = static_cast<int>(out.arms.size());
                out.arms.push_back(std::move(arm));
            }
            return out;
        }
        case StmtKind::Block:
            out.op = SOp::Block;
            for (const auto& b : s.body) out.body.push_back(compile_stmt(b, sc, proc));
            return out;
        case StmtKind::Delay:
            warn("delay", s.span, "delay controls are ignored by the cycle simulator");
            out.op = SOp::Block;
            for (const auto& b : s.body) out.body.push_back(compile_stmt(b, sc, proc));
            return out;
        case StmtKind::Invalid: break;
        }
        throw SimError("statement cannot be simulated", s.span);
    }

    void add_comb(Process p, ProcessInfo info) {
        comb_.push_back(std::move(p));
        comb_info_.push_back(std::move(info));
    }

    void add_edge(Process p, ProcessInfo info) {
        p.info = design_.edge_processes.size();
        prog_.edge.push_back(std::move(p));
        design_.edge_processes.push_back(std::move(info));
    }

    // ---- instances --------------------------------------------------------

    ParamEnv param_overrides(const Instantiation& inst, const ModuleDecl& child, const Scope& parent) {
        ParamEnv ov;
        std::vector<std::string> overridable;
        for (const auto& p : child.params)
            if (!p.local) overridable.push_back(p.name);
        for (const auto& item : child.items)
            if (const auto* p = std::get_if<ParamDecl>(&item); p && !p->local) overridable.push_back(p->name);
        for (size_t i = 0; i < inst.params.size(); ++i) {
            const Connection& c = inst.params[i];
            if (!c.expr) continue;
            std::string name = c.port;
            if (name.empty()) {
                if (i >= overridable.size())
                    throw SimError("too many parameter overrides for '" + child.name + "'", c.span);
                name = overridable[i];
            } else if (std::find(overridable.begin(), overridable.end(), name) == overridable.end()) {
                throw SimError("module '" + child.name + "' has no parameter '" + name + "'", c.span);
            }
            auto v = eval_const(*c.expr, parent.env);
            if (!v) throw SimError("override of parameter '" + name + "' is not constant", c.span);
            ov[name] = *v;
        }
        return ov;
    }

    static std::optional<Range> port_range(const ModuleDecl& m, const PortDecl& p, NetType& net) {
        net = p.net;
        if (p.range) return p.range;
        // Non-ANSI style may give the range on a later net declaration.
        for (const auto& item : m.items)
            if (const auto* nd = std::get_if<NetDecl>(&item); nd && nd->name == p.name) {
                if (nd->type == NetType::Integer) net = NetType::Integer;
                if (nd->range) return nd->range;
            }
        return std::nullopt;
    }

    Scope instantiate(const ModuleDecl& decl, const std::string& path, const ParamEnv& overrides,
                      const std::map<std::string, PortSlot>& aliases, int depth, bool is_top) {
        if (depth > kMaxDepth)
            throw SimError("instance hierarchy deeper than " + std::to_string(kMaxDepth) + " at '" + path + "'",
                           decl.span);
        Scope sc;
        sc.path = path;
        sc.prefix = path.empty() ? "" : path + ".";
        sc.decl = &decl;
        sc.env = module_params(decl, overrides);

        auto param_width = [&](const ParamDecl& p) {
            if (p.range) {
                auto w = range_width(p.range, sc.env);
                sc.widths[p.name] = w.value_or(32);
            } else {
                sc.widths[p.name] = std::min<uint32_t>(64, self_width(p.value, sc.widths, sc.env));
            }
            if (auto it = sc.env.find(p.name); it != sc.env.end()) it->second &= width_mask(sc.widths[p.name]);
        };
        for (const auto& p : decl.params) param_width(p);
        for (const auto& item : decl.items)
            if (const auto* p = std::get_if<ParamDecl>(&item)) param_width(*p);

        for (const auto& p : decl.ports) {
            if (p.dir == Direction::Inout)
                throw SimError("inout port '" + p.name + "' is not supported by the simulator", p.span);
            NetType net;
            auto range = port_range(decl, p, net);
            std::optional<PortSlot> alias;
            if (auto it = aliases.find(p.name); it != aliases.end()) alias = it->second;
            declare(sc, p.name, range, p.span, alias, net);
            if (is_top && p.dir == Direction::Input) {
                uint32_t slot = sc.sigs[p.name].slot;
                prog_.input_slots.push_back(slot);
                if (p.name == design_.options.clock) prog_.clock_slot = slot;
                if (p.name == design_.options.reset) prog_.reset_slot = slot;
            }
        }
        for (const auto& item : decl.items) {
            const auto* nd = std::get_if<NetDecl>(&item);
            if (!nd || sc.sigs.count(nd->name)) continue;
            declare(sc, nd->name, nd->range, nd->span, std::nullopt, nd->type);
        }

        ProcessInfo base;
        base.instance = path;
        base.module = decl.name;

        for (const auto& item : decl.items) {
            if (const auto* nd = std::get_if<NetDecl>(&item)) {
                if (!nd->init) continue;
                if (nd->type != NetType::Wire) {
                    warn("init:" + sc.prefix + nd->name, nd->span,
                         "initializer of '" + sc.prefix + nd->name + "' is ignored; state starts at 0");
                    continue;
                }
                Process p;
                p.continuous = true;
                Expr target = Expr::identifier(nd->name, nd->span);
                Statement st;
                st.kind = StmtKind::Blocking;
                st.target = target;
                st.value = *nd->init;
                p.body = compile_stmt(st, sc, p);
                ProcessInfo info = base;
                info.span = nd->span;
                add_comb(std::move(p), info);
            } else if (const auto* ca = std::get_if<ContinuousAssign>(&item)) {
                Process p;
                p.continuous = true;
                Statement st;
                st.kind = StmtKind::Blocking;
                st.target = ca->lhs;
                st.value = ca->rhs;
                st.span = ca->span;
                p.body = compile_stmt(st, sc, p);
                ProcessInfo info = base;
                info.span = ca->span;
                add_comb(std::move(p), info);
            } else if (const auto* ab = std::get_if<AlwaysBlock>(&item)) {
                compile_always(*ab, sc, base);
            } else if (const auto* ib = std::get_if<InitialBlock>(&item)) {
                warn("initial:" + sc.prefix + std::to_string(ib->span.start), ib->span,
                     "initial block is ignored; state starts at 0");
            }
        }

        for (const auto& item : decl.items) {
            const auto* inst = std::get_if<Instantiation>(&item);
            if (!inst) continue;
            auto mit = modules_.find(inst->module_name);
            if (mit == modules_.end())
                throw SimError("instance '" + sc.prefix + inst->instance_name + "' refers to undefined module '" +
                                   inst->module_name + "'",
                               inst->span);
            const ModuleDecl& child = *mit->second;
            ParamEnv ov = param_overrides(*inst, child, sc);
            ParamEnv child_env = module_params(child, ov);

            // Pair each connection with a child port.
            std::vector<std::pair<const PortDecl*, const Connection*>> conns;
            for (size_t i = 0; i < inst->ports.size(); ++i) {
                const Connection& c = inst->ports[i];
                const PortDecl* pd = nullptr;
                if (c.port.empty()) {
                    if (i >= child.ports.size())
                        throw SimError("too many connections for module '" + child.name + "'", c.span);
                    pd = &child.ports[i];
                } else {
                    pd = child.find_port(c.port);
                    if (!pd) throw SimError("module '" + child.name + "' has no port '" + c.port + "'", c.span);
                }
                conns.emplace_back(pd, &c);
            }

            std::map<std::string, PortSlot> child_alias;
            for (const auto& [pd, c] : conns) {
                if (!c->expr || c->expr->kind != ExprKind::Identifier) continue;
                auto sit = sc.sigs.find(c->expr->name);
                if (sit == sc.sigs.end()) continue;
                NetType net;
                auto range = port_range(child, *pd, net);
                uint32_t w = 1;
                if (net == NetType::Integer && !range) w = 32;
                else if (range) w = range_width(range, child_env).value_or(0);
                if (w == sit->second.width) child_alias[pd->name] = {sit->second.slot, w};
            }

            std::string child_path = sc.prefix + inst->instance_name;
            Scope csc = instantiate(child, child_path, ov, child_alias, depth + 1, false);

            for (const auto& [pd, c] : conns) {
                if (!c->expr || child_alias.count(pd->name)) continue;
                const SigDecl& port = csc.sigs.at(pd->name);
                Process p;
                p.continuous = true;
                ProcessInfo info = base;
                info.span = c->span;
                if (pd->dir == Direction::Input) {
                    LvalPart lp;
                    lp.slot = port.slot;
                    lp.width = port.width;
                    lp.slot_width = port.width;
                    p.writes.push_back({port.slot, 0, port.width - 1});
                    p.body.op = SOp::Assign;
                    p.body.lhs.push_back(lp);
                    p.body.rhs = compile(*c->expr, port.width, sc, &p.reads);
                } else {
                    p.body.op = SOp::Assign;
                    compile_lvalue(*c->expr, sc, p.body.lhs, p.writes, &p.reads);
                    Node src;
                    src.op = Op::Sig;
                    src.slot = port.slot;
                    src.width = std::max(port.width, lhs_width(p.body.lhs));
                    p.reads.push_back({port.slot, 0, port.width - 1});
                    p.body.rhs = src;
                }
                add_comb(std::move(p), info);
            }
        }
        return sc;
    }

    void compile_always(const AlwaysBlock& ab, Scope& sc, const ProcessInfo& base) {
        ProcessInfo info = base;
        info.span = ab.span;
        const Sensitivity& sens = ab.sensitivity;
        if (sens.kind == Sensitivity::Kind::None)
            throw SimError("always block without an event control cannot be simulated", ab.span);
        std::vector<const EdgeEvent*> edges;
        bool level = false;
        for (const auto& ev : sens.events) {
            if (ev.edge == EdgeKind::Level)
                level = true;
            else
                edges.push_back(&ev);
        }
        Process p;
        if (edges.empty()) {
            p.body = compile_stmt(ab.body, sc, p);
            add_comb(std::move(p), info);
            return;
        }
        if (level) throw SimError("sensitivity list mixes edge and level events", sens.span);
        if (edges.size() > 2) throw SimError("process is sensitive to more than two edges (multiple clocks)", sens.span);

        const EdgeEvent* clock = edges[0];
        const EdgeEvent* reset = nullptr;
        if (edges.size() == 2) {
            const Statement* guard = leading_if(ab.body);
            for (const EdgeEvent* ev : edges)
                if (guard && mentions(guard->value, ev->signal)) reset = ev;
            if (!reset)
                throw SimError("two-edge process must test its asynchronous reset in a leading if", sens.span);
            clock = edges[0] == reset ? edges[1] : edges[0];
        }
        auto clk = sc.sigs.find(clock->signal);
        if (clk == sc.sigs.end()) throw SimError("unknown clock '" + clock->signal + "'", clock->span);
        if (clock->edge != EdgeKind::Posedge)
            throw SimError("falling-edge clock '" + sc.prefix + clock->signal + "' is not supported", clock->span);
        uint32_t slot = clk->second.slot;
        bool is_input = std::find(prog_.input_slots.begin(), prog_.input_slots.end(), slot) != prog_.input_slots.end();
        if (!prog_.clock_slot) {
            if (!is_input)
                throw SimError("clock '" + sc.prefix + clock->signal + "' is not a top-level input", clock->span);
            prog_.clock_slot = slot;
        }
        if (slot != *prog_.clock_slot) {
            if (!is_input)
                throw SimError("clock '" + sc.prefix + clock->signal +
                                   "' is derived inside the design; only one top-level clock is supported",
                               clock->span);
            throw SimError("clock '" + sc.prefix + clock->signal + "' differs from '" + slot_names_[*prog_.clock_slot] +
                               "'; multiple clock domains are not supported",
                           clock->span);
        }
        info.edge = true;
        info.clock = slot_names_[slot];
        if (reset) {
            auto rs = sc.sigs.find(reset->signal);
            if (rs == sc.sigs.end()) throw SimError("unknown reset '" + reset->signal + "'", reset->span);
            info.reset = slot_names_[rs->second.slot];
        }
        p.body = compile_stmt(ab.body, sc, p);
        add_edge(std::move(p), info);
    }

    // ---- scheduling -------------------------------------------------------

    static bool overlap(const BitRange& a, const BitRange& b) {
        return a.slot == b.slot && a.lo <= b.hi && b.lo <= a.hi;
    }

    void order_comb() {
        size_t n = comb_.size();
        std::vector<std::vector<size_t>> succ(n);
        std::vector<size_t> indeg(n, 0);
        std::map<uint32_t, std::vector<std::pair<size_t, BitRange>>> writers;
        for (size_t i = 0; i < n; ++i)
            for (const auto& w : comb_[i].writes) writers[w.slot].push_back({i, w});
        std::vector<bool> self_loop(n, false);
        for (size_t j = 0; j < n; ++j) {
            std::set<size_t> from;
            for (const auto& r : comb_[j].reads) {
                auto it = writers.find(r.slot);
                if (it == writers.end()) continue;
                for (const auto& [i, w] : it->second)
                    if (overlap(w, r)) {
                        if (i == j) {
                            if (comb_[j].continuous) self_loop[j] = true;
                        } else {
                            from.insert(i);
                        }
                    }
            }
            for (size_t i : from) {
                succ[i].push_back(j);
                ++indeg[j];
            }
        }
        for (size_t i = 0; i < n; ++i)
            if (self_loop[i]) report_cycle({i});

        std::priority_queue<size_t, std::vector<size_t>, std::greater<>> ready;
        for (size_t i = 0; i < n; ++i)
            if (indeg[i] == 0) ready.push(i);
        std::vector<size_t> order;
        while (!ready.empty()) {
            size_t i = ready.top();
            ready.pop();
            order.push_back(i);
            for (size_t j : succ[i])
                if (--indeg[j] == 0) ready.push(j);
        }
        if (order.size() != n) {
            // Tarjan over the leftover nodes to find a strongly connected component.
            std::vector<int> index(n, -1), low(n, 0);
            std::vector<bool> on(n, false);
            std::vector<size_t> stack;
            int counter = 0;
            std::vector<size_t> found;
            std::function<void(size_t)> strong = [&](size_t v) {
                index[v] = low[v] = counter++;
                stack.push_back(v);
                on[v] = true;
                for (size_t w : succ[v]) {
                    if (index[w] < 0) {
                        strong(w);
                        low[v] = std::min(low[v], low[w]);
                    } else if (on[w]) {
                        low[v] = std::min(low[v], index[w]);
                    }
                }
                if (low[v] == index[v]) {
                    std::vector<size_t> comp;
                    size_t w;
                    do {
                        w = stack.back();
                        stack.pop_back();
                        on[w] = false;
                        comp.push_back(w);
                    } while (w != v);
                    if (comp.size() > 1 && found.empty()) found = comp;
                }
            };
            for (size_t i = 0; i < n && found.empty(); ++i)
                if (index[i] < 0 && indeg[i] > 0) strong(i);
            report_cycle(found);
        }
        for (size_t k = 0; k < order.size(); ++k) {
            Process p = std::move(comb_[order[k]]);
            p.info = k;
            prog_.comb.push_back(std::move(p));
            design_.comb_processes.push_back(comb_info_[order[k]]);
        }
    }

    [[noreturn]] void report_cycle(const std::vector<size_t>& procs) {
        std::set<size_t> in(procs.begin(), procs.end());
        std::set<std::string> names;
        for (size_t i : procs)
            for (const auto& w : comb_[i].writes)
                for (size_t j : procs)
                    for (const auto& r : comb_[j].reads)
                        if (overlap(w, r) && (i != j || procs.size() == 1)) names.insert(slot_names_[w.slot]);
        std::string list;
        for (const auto& nm : names) list += (list.empty() ? "" : ", ") + nm;
        Span where = procs.empty() ? Span{} : comb_info_[*in.begin()].span;
        throw SimError("combinational cycle through " + list, where);
    }

    void assign_kinds() {
        std::vector<SignalKind> kind(prog_.slot_count, SignalKind::Comb);
        for (const auto& p : prog_.edge)
            for (const auto& w : p.writes) kind[w.slot] = SignalKind::State;
        for (uint32_t s : prog_.input_slots) kind[s] = SignalKind::Input;
        for (auto& s : design_.signals) s.kind = kind[s.slot];
        for (auto& p : prog_.edge)
            for (const auto& w : p.writes)
                if (std::find(p.write_slots.begin(), p.write_slots.end(), w.slot) == p.write_slots.end())
                    p.write_slots.push_back(w.slot);
        for (auto& p : prog_.comb)
            for (const auto& w : p.writes)
                if (std::find(p.write_slots.begin(), p.write_slots.end(), w.slot) == p.write_slots.end())
                    p.write_slots.push_back(w.slot);
    }
};

}  // namespace

ElaboratedDesign elaborate(const std::vector<const Ast*>& asts, std::string_view top, const ElabOptions& options) {
    for (const Ast* a : asts)
        if (a->recovered()) throw SimError("sources contain syntax errors; fix them before simulating");
    ElaboratedDesign d;
    d.top = std::string(top);
    d.options = options;
    auto prog = std::make_shared<Program>();
    prog->reset_active_low = options.reset_active_low;
    Elaborator el(asts, d, *prog);
    el.run(top);
    d.ports = el.top_ports_;
    d.program = prog;
    return d;
}

}  // namespace veriloop::sim
