// SPDX-License-Identifier: Apache-2.0
#include "veriloop/lint/lint.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "json.hpp"
#include "veriloop/frontend/consteval.hpp"

namespace veriloop::lint {

using namespace frontend;

const std::vector<RuleInfo>& rules() {
    static const std::vector<RuleInfo> table = {
        {"LLM001", "MismatchBeginEnd", Severity::Error},
        {"LLM002", "MismatchCaseEndcase", Severity::Error},
        {"LLM003", "MultiDrive", Severity::Error},
        {"LLM004", "AmbiguousClock", Severity::Error},
        {"LLM005", "IncompleteCombinationalAssign", Severity::Warning},
        {"LLM006", "MissingCaseDefault", Severity::Warning},
        {"LLM007", "NonSynthesizableConstruct", Severity::Warning},
    };
    return table;
}

const RuleInfo* find_rule(std::string_view code) {
    for (const auto& r : rules())
        if (r.code == code) return &r;
    return nullptr;
}

bool LintConfig::set(std::string_view code, std::string_view level) {
    RuleSetting s;
    if (level == "off") {
        s.enabled = false;
    } else if (level == "warn" || level == "warning") {
        s.severity = Severity::Warning;
    } else if (level == "error") {
        s.severity = Severity::Error;
    } else {
        return false;
    }
    rules[std::string(code)] = s;
    return true;
}

bool LintConfig::enabled(std::string_view code) const {
    auto it = rules.find(code);
    return it == rules.end() || it->second.enabled;
}

std::vector<std::string> LintConfig::unknown_codes() const {
    std::vector<std::string> out;
    for (const auto& [code, setting] : rules)
        if (!find_rule(code)) out.push_back(code);
    return out;
}

namespace {

uint64_t full_mask(uint32_t width) { return width >= 64 ? ~uint64_t{0} : (uint64_t{1} << width) - 1; }

uint64_t range_mask(uint32_t lo, uint32_t hi) {
    if (lo >= 64) return 0;
    hi = std::min<uint32_t>(hi, 63);
    return full_mask(hi - lo + 1) << lo;
}

}  // namespace

namespace {

class ModuleLinter {
public:
    ModuleLinter(const ModuleDecl& mod, const ModuleDrives* drives, const LintConfig& config,
                 std::vector<Diagnostic>& out)
        : mod_(mod), drives_(drives), config_(config), out_(out), env_(module_params(mod)),
          widths_(declared_widths(mod, env_)) {}

    void run() {
        if (drives_) multi_drive_cross();
        for (const auto& item : mod_.items) {
            if (auto a = std::get_if<AlwaysBlock>(&item)) always(*a);
            if (auto b = std::get_if<InitialBlock>(&item)) initial(*b);
        }
    }

private:
    const ModuleDecl& mod_;
    const ModuleDrives* drives_;
    const LintConfig& config_;
    std::vector<Diagnostic>& out_;
    ParamEnv env_;
    WidthTable widths_;

    void emit(std::string code, Severity sev, const Span& span, std::string msg, std::string hint,
              std::vector<Span> related = {}) {
        if (!config_.enabled(code)) return;
        auto it = config_.rules.find(code);
        if (it != config_.rules.end() && it->second.severity) sev = *it->second.severity;
        Diagnostic d;
        d.code = std::move(code);
        d.severity = sev;
        d.span = span;
        d.message = std::move(msg);
        d.hint = std::move(hint);
        d.related = std::move(related);
        out_.push_back(std::move(d));
    }

    uint32_t width_of(const std::string& name) const {
        auto it = widths_.find(name);
        return it == widths_.end() ? 1 : it->second;
    }

    // ---------------------------------------------------------------- LLM003

    void multi_drive_cross() {
        for (const auto& [signal, sites] : drives_->signals) {
            std::vector<const DriveSite*> live;
            for (const auto& s : sites) {
                auto pk = drives_->processes[s.process].kind;
                if (pk != ProcessKind::Initial && pk != ProcessKind::NetInit) live.push_back(&s);
            }
            const DriveSite* primary = nullptr;
            std::set<size_t> involved;
            for (size_t j = 0; j < live.size(); ++j) {
                for (size_t i = 0; i < live.size(); ++i) {
                    if (i == j || live[i]->process == live[j]->process) continue;
                    if (!sites_overlap(*live[i], *live[j])) continue;
                    involved.insert(live[i]->process);
                    involved.insert(live[j]->process);
                    if (!primary && i < j) primary = live[j];
                }
            }
            if (!primary) continue;
            std::vector<Span> related;
            for (const DriveSite* s : live)
                if (s != primary && involved.count(s->process)) related.push_back(s->span);
            emit("LLM003", Severity::Error, primary->span,
                 "'" + signal + "' is driven from " + std::to_string(involved.size()) +
                     " different processes",
                 "drive '" + signal + "' from exactly one always block or continuous assignment", related);
        }
    }

    // Path-sensitive record of sites that may already have written a signal.
    struct Written {
        uint64_t mask;
        Span span;
    };
    using MayState = std::map<std::string, std::vector<Written>>;
    struct Override {
        Span first;
        std::vector<Span> sites;
    };

    std::optional<std::pair<std::string, uint64_t>> target_bits(const Expr& lv) const {
        switch (lv.kind) {
        case ExprKind::Identifier: return std::make_pair(lv.name, full_mask(width_of(lv.name)));
        case ExprKind::BitSelect: {
            auto idx = eval_const(lv.operands.at(0), env_);
            if (!idx) return std::make_pair(lv.name, full_mask(width_of(lv.name)));
            return std::make_pair(lv.name, range_mask(uint32_t(*idx), uint32_t(*idx)));
        }
        case ExprKind::PartSelect: {
            auto a = eval_const(lv.operands.at(0), env_), b = eval_const(lv.operands.at(1), env_);
            if (!a || !b) return std::make_pair(lv.name, full_mask(width_of(lv.name)));
            return std::make_pair(lv.name, range_mask(uint32_t(std::min(*a, *b)), uint32_t(std::max(*a, *b))));
        }
        default: return std::nullopt;
        }
    }

    template <typename Fn>
    void for_each_target(const Expr& lv, Fn&& fn) const {
        if (lv.kind == ExprKind::Concat) {
            for (const auto& e : lv.operands) for_each_target(e, fn);
            return;
        }
        if (auto t = target_bits(lv)) fn(t->first, t->second, lv.span);
    }

    MayState may_walk(const Statement& s, MayState in, std::map<std::string, Override>& found) const {
        switch (s.kind) {
        case StmtKind::Blocking:
        case StmtKind::Nonblocking:
            for_each_target(s.target, [&](const std::string& sig, uint64_t mask, const Span& span) {
                auto& prior = in[sig];
                std::vector<Span> hits;
                for (const auto& w : prior)
                    if (w.mask & mask) hits.push_back(w.span);
                if (!hits.empty()) {
                    auto [it, fresh] = found.try_emplace(sig);
                    if (fresh) it->second.first = span;
                    for (const auto& h : hits) it->second.sites.push_back(h);
                    it->second.sites.push_back(span);
                }
                prior.push_back({mask, span});
            });
            return in;
        case StmtKind::Block:
            for (const auto& b : s.body) in = may_walk(b, std::move(in), found);
            return in;
        case StmtKind::Delay:
            for (const auto& b : s.body) in = may_walk(b, std::move(in), found);
            return in;
        case StmtKind::If: {
            MayState a = in;
            for (const auto& b : s.body) a = may_walk(b, std::move(a), found);
            MayState b = std::move(in);
            for (const auto& e : s.else_body) b = may_walk(e, std::move(b), found);
            return join(std::move(a), b);
        }
        case StmtKind::Case: {
            MayState acc = in;  // the no-arm-matched path
            for (const auto& item : s.items) {
                MayState arm = in;
                for (const auto& b : item.body) arm = may_walk(b, std::move(arm), found);
                acc = join(std::move(acc), arm);
            }
            return acc;
        }
        default: return in;
        }
    }

    static MayState join(MayState a, const MayState& b) {
        for (const auto& [sig, writes] : b) {
            auto& dst = a[sig];
            for (const auto& w : writes) {
                bool dup = std::any_of(dst.begin(), dst.end(),
                                       [&](const Written& x) { return x.span.start == w.span.start && x.mask == w.mask; });
                if (!dup) dst.push_back(w);
            }
        }
        return a;
    }

    void multi_drive_intra(const AlwaysBlock& a) {
        std::map<std::string, Override> found;
        may_walk(a.body, {}, found);
        std::vector<std::pair<std::string, Override>> ordered(found.begin(), found.end());
        std::sort(ordered.begin(), ordered.end(),
                  [](const auto& x, const auto& y) { return x.second.first.start < y.second.first.start; });
        for (auto& [sig, ov] : ordered) {
            std::vector<Span> related;
            std::set<uint32_t> seen{ov.first.start};
            for (const auto& s : ov.sites)
                if (seen.insert(s.start).second) related.push_back(s);
            std::sort(related.begin(), related.end(), [](const Span& x, const Span& y) { return x.start < y.start; });
            emit("LLM003", Severity::Warning, ov.first,
                 "'" + sig + "' is assigned more than once on one path through this always block; the last "
                 "assignment wins",
                 "assign '" + sig + "' once per path, or keep the default assignment and accept the override",
                 related);
        }
    }

    // ---------------------------------------------------------------- LLM004

    // Signal tested by a reset-style condition: s, !s, ~s, s == k, s != k.
    static std::optional<std::string> tested_signal(const Expr& c) {
        if (c.kind == ExprKind::Identifier) return c.name;
        if (c.kind == ExprKind::Unary && (c.op == "!" || c.op == "~") &&
            c.operands.at(0).kind == ExprKind::Identifier)
            return c.operands[0].name;
        if (c.kind == ExprKind::Binary && (c.op == "==" || c.op == "!=" || c.op == "===" || c.op == "!==")) {
            const Expr& l = c.operands.at(0);
            const Expr& r = c.operands.at(1);
            if (l.kind == ExprKind::Identifier && r.kind == ExprKind::Number) return l.name;
            if (r.kind == ExprKind::Identifier && l.kind == ExprKind::Number) return r.name;
        }
        return std::nullopt;
    }

    void ambiguous_clock(const AlwaysBlock& a) {
        size_t edges = a.sensitivity.edge_count();
        if (edges < 2) return;
        std::set<std::string> edge_signals;
        for (const auto& ev : a.sensitivity.events)
            if (ev.edge != EdgeKind::Level) edge_signals.insert(ev.signal);
        if (edge_signals.size() < 2) {
            emit("LLM004", Severity::Error, a.sensitivity.span,
                 "always block is sensitive to both edges of '" + *edge_signals.begin() + "'",
                 "clock the block on a single edge");
            return;
        }

        std::vector<const Statement*> top;
        if (a.body.kind == StmtKind::Block) {
            for (const auto& s : a.body.body) top.push_back(&s);
        } else {
            top.push_back(&a.body);
        }
        const std::string hint =
            "use exactly one if/else whose condition tests the asynchronous reset and put all clocked "
            "logic in the else branch";
        if (top.empty()) {
            emit("LLM004", Severity::Error, a.span,
                 "always block has " + std::to_string(edges) + " edge events but no reset guard", hint);
            return;
        }
        // Peel an if / else-if chain of guards over distinct edge signals.
        std::set<std::string> tested;
        const Statement* cur = top.front();
        const Statement* bad = nullptr;
        while (tested.size() + 1 < edge_signals.size()) {
            std::optional<std::string> sig;
            if (cur->kind == StmtKind::If) sig = tested_signal(cur->value);
            if (!sig || !edge_signals.count(*sig) || tested.count(*sig)) {
                bad = cur;
                break;
            }
            tested.insert(*sig);
            if (cur->else_body.empty()) {
                bad = cur;
                break;
            }
            if (tested.size() + 1 < edge_signals.size()) cur = &cur->else_body.front();
        }
        if (bad) {
            emit("LLM004", Severity::Error, bad->span,
                 "always block is sensitive to " + std::to_string(edges) +
                     " edges but this statement is not an if/else guarding on a non-clock edge signal",
                 hint);
            return;
        }
        if (top.size() > 1) {
            std::string clock;
            for (const auto& s : edge_signals)
                if (!tested.count(s)) clock = s;
            emit("LLM004", Severity::Error, top[1]->span,
                 "statement after the reset if/else runs on both the '" + clock + "' edge and the reset edge",
                 "move this statement into the else branch of the reset guard");
        }
    }

    // ------------------------------------------------------- LLM005 / LLM006

    using DefState = std::map<std::string, uint64_t>;

    static bool has_invalid(const Statement& s) {
        bool bad = false;
        for_each_statement(s, [&](const Statement& st) { bad |= st.kind == StmtKind::Invalid; });
        return bad;
    }

    DefState def_walk(const Statement& s, DefState in) const {
        switch (s.kind) {
        case StmtKind::Blocking:
        case StmtKind::Nonblocking:
            for_each_target(s.target, [&](const std::string& sig, uint64_t mask, const Span&) { in[sig] |= mask; });
            return in;
        case StmtKind::Block:
        case StmtKind::Delay:
            for (const auto& b : s.body) in = def_walk(b, std::move(in));
            return in;
        case StmtKind::If: {
            DefState a = in;
            for (const auto& b : s.body) a = def_walk(b, std::move(a));
            DefState b = std::move(in);
            for (const auto& e : s.else_body) b = def_walk(e, std::move(b));
            return meet(a, b);
        }
        case StmtKind::Case: {
            std::optional<DefState> acc;
            if (!s.default_item() && !exhaustive(s)) acc = in;
            for (const auto& item : s.items) {
                DefState arm = in;
                for (const auto& b : item.body) arm = def_walk(b, std::move(arm));
                acc = acc ? meet(*acc, arm) : arm;
            }
            return acc ? *acc : in;
        }
        default: return in;
        }
    }

    static DefState meet(const DefState& a, const DefState& b) {
        DefState out;
        for (const auto& [sig, mask] : a) {
            auto it = b.find(sig);
            if (it != b.end() && (mask & it->second)) out[sig] = mask & it->second;
        }
        return out;
    }

    // Whether the labels of a case cover every value of its subject.
    bool exhaustive(const Statement& s) const {
        uint32_t w = self_width(s.value, widths_, env_);
        if (w > 16) return false;
        std::vector<bool> covered(size_t{1} << w, false);
        for (const auto& item : s.items) {
            for (const auto& l : item.labels) {
                uint64_t care = full_mask(w), value = 0;
                if (l.kind == ExprKind::Number) {
                    if (l.literal.xz_mask != 0) {
                        if (s.case_kind == CaseKind::Case) continue;  // never matches two-state values
                        care &= ~l.literal.xz_mask;
                    }
                    value = l.literal.value;
                } else if (auto v = eval_const(l, env_)) {
                    value = *v;
                } else {
                    continue;
                }
                for (uint64_t x = 0; x < covered.size(); ++x)
                    if ((x & care) == (value & care)) covered[x] = true;
            }
        }
        return std::all_of(covered.begin(), covered.end(), [](bool b) { return b; });
    }

    void incomplete_assign(const AlwaysBlock& a) {
        std::map<std::string, Span> first_site;
        for_each_statement(a.body, [&](const Statement& st) {
            if (st.kind != StmtKind::Blocking && st.kind != StmtKind::Nonblocking) return;
            for_each_target(st.target, [&](const std::string& sig, uint64_t, const Span& span) {
                first_site.try_emplace(sig, span);
            });
        });
        DefState def = def_walk(a.body, {});
        std::vector<std::pair<std::string, Span>> latches;
        for (const auto& [sig, span] : first_site) {
            uint64_t need = full_mask(width_of(sig));
            auto it = def.find(sig);
            if (it == def.end() || (it->second & need) != need) latches.emplace_back(sig, span);
        }
        std::sort(latches.begin(), latches.end(),
                  [](const auto& x, const auto& y) { return x.second.start < y.second.start; });
        for (const auto& [sig, span] : latches)
            emit("LLM005", Severity::Warning, span,
                 "'" + sig + "' is not assigned on every path through this combinational block; a latch "
                 "will be inferred",
                 "assign '" + sig + "' a default value at the top of the block or cover every branch",
                 {a.span});
    }

    void missing_default(const AlwaysBlock& a) {
        for_each_statement(a.body, [&](const Statement& st) {
            if (st.kind != StmtKind::Case || st.default_item() || st.value.kind == ExprKind::Invalid) return;
            if (exhaustive(st)) return;
            emit("LLM006", Severity::Warning, st.span,
                 "case statement in a combinational block has no default arm and its labels do not cover "
                 "every value of the selector",
                 "add a 'default:' arm");
        });
    }

    // ---------------------------------------------------------------- LLM007

    void delays(const Statement& body) {
        for_each_statement(body, [&](const Statement& st) {
            if (st.kind == StmtKind::Delay)
                emit("LLM007", Severity::Warning, st.span, "delay control '#' is not synthesizable",
                     "remove the delay; timing comes from the clock");
        });
    }

    void initial(const InitialBlock& b) {
        emit("LLM007", Severity::Warning, b.span, "initial block is not synthesizable",
             "initialize state through the reset branch of a clocked always block");
        delays(b.body);
    }

    void always(const AlwaysBlock& a) {
        bool recovered = has_invalid(a.body);
        if (config_.intra_process_multi_drive && !recovered) multi_drive_intra(a);
        ambiguous_clock(a);
        if (a.sensitivity.is_combinational() && !recovered) {
            incomplete_assign(a);
            missing_default(a);
        }
        delays(a.body);
    }
};

}  // namespace

namespace {

void retag_recoveries(const Ast& ast, const LintConfig& config, std::vector<Diagnostic>& out) {
    for (const auto& ev : ast.recoveries) {
        Diagnostic d;
        if (ev.expected == "end" || (ev.context == RecoveryContext::Module && ev.found == "end")) {
            d.code = "LLM001";
            if (ev.found == "}") {
                d.message = "begin-end block is closed with '}' instead of 'end'";
                d.hint = "replace '}' with 'end'";
            } else if (ev.expected == "end") {
                d.message = "begin-end block is not closed before " +
                            (ev.found == "end of file" ? ev.found : "'" + ev.found + "'");
                d.hint = "add the missing 'end'";
            } else {
                d.message = "'end' without a matching 'begin'";
                d.hint = "remove the extra 'end' or add the missing 'begin'";
            }
        } else if (ev.expected == "endcase") {
            d.code = "LLM002";
            if (ev.found == "end") {
                d.message = "case block is closed with 'end' instead of 'endcase'";
                d.hint = "replace 'end' with 'endcase'";
            } else {
                d.message = "case block is not closed with 'endcase' before " +
                            (ev.found == "end of file" ? ev.found : "'" + ev.found + "'");
                d.hint = "add 'endcase' after the last case item";
            }
        } else {
            continue;
        }
        if (!config.enabled(d.code)) continue;
        d.severity = Severity::Error;
        auto it = config.rules.find(d.code);
        if (it != config.rules.end() && it->second.severity) d.severity = *it->second.severity;
        d.span = ev.span;
        out.push_back(std::move(d));
    }
}

}  // namespace

std::vector<Diagnostic> lint(const std::vector<const Ast*>& asts, const DriveMap& drives, const LintConfig& config) {
    std::vector<Diagnostic> out;
    for (const Ast* ast : asts) {
        retag_recoveries(*ast, config, out);
        for (const auto& m : ast->modules) ModuleLinter(m, drives.find(m.name), config, out).run();
    }
    sort_diagnostics(out);
    return out;
}

std::vector<Diagnostic> lint(const Ast& ast, const DriveMap& drives, const LintConfig& config) {
    return lint(std::vector<const Ast*>{&ast}, drives, config);
}

std::vector<Diagnostic> merge_diagnostics(std::vector<Diagnostic> parse_diags, std::vector<Diagnostic> lint_diags,
                                          const LintConfig& config) {
    std::set<std::pair<uint32_t, uint32_t>> retagged;
    for (const auto& d : lint_diags)
        if (d.code == "LLM001" || d.code == "LLM002") retagged.emplace(d.span.file, d.span.start);
    std::vector<Diagnostic> out;
    for (auto& d : parse_diags)
        if (!(d.code == "SYN000" && retagged.count({d.span.file, d.span.start}))) out.push_back(std::move(d));
    for (auto& d : lint_diags) out.push_back(std::move(d));
    if (config.deny_warnings)
        for (auto& d : out) d.severity = Severity::Error;
    sort_diagnostics(out);
    return out;
}

namespace {

nlohmann::json position(uint32_t line, uint32_t col) { return {{"line", line}, {"col", col}}; }

}  // namespace

std::string source_name(uint32_t file, const SourceManager& sources) {
    if (file < sources.size()) return sources.name(file);
    if (file == kNoSourceFile) return "<manifest>";
    if (file == kSimulationFile) return "<simulation>";
    if (file == kResponseFile) return "<response>";
    return "<input>";
}

std::string render_diagnostics(const std::vector<Diagnostic>& diags, Format format, const SourceManager& sources) {
    auto file_name = [&](uint32_t id) { return source_name(id, sources); };
    if (format == Format::Text) {
        std::ostringstream os;
        for (const auto& d : diags)
            os << file_name(d.span.file) << ":" << d.span.line << ":" << d.span.col << ": "
               << severity_name(d.severity) << "[" << d.code << "] " << d.message << "\n";
        return os.str();
    }
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& d : diags) {
        nlohmann::json related = nlohmann::json::array();
        for (const auto& r : d.related)
            related.push_back({{"file", file_name(r.file)},
                               {"start", position(r.line, r.col)},
                               {"end", position(r.end_line, r.end_col)}});
        arr.push_back({{"rule", d.code},
                       {"severity", severity_name(d.severity)},
                       {"file", file_name(d.span.file)},
                       {"start", position(d.span.line, d.span.col)},
                       {"end", position(d.span.end_line, d.span.end_col)},
                       {"message", d.message},
                       {"hint", d.hint},
                       {"related", related}});
    }
    return arr.dump(2) + "\n";
}

std::vector<const Ast*> Analysis::asts() const {
    std::vector<const Ast*> out;
    for (const auto& f : files) out.push_back(&f.ast);
    return out;
}

Analysis analyze(const SourceManager& sources, const MacroTable& defines, const LintConfig& config) {
    Analysis a;
    std::vector<Diagnostic> parse_diags;
    for (uint32_t id = 0; id < sources.size(); ++id) {
        a.files.push_back(parse_source(sources.file(id).text, id, defines));
        for (const auto& d : a.files.back().diagnostics) parse_diags.push_back(d);
    }
    auto asts = a.asts();
    DriveMap drives = build_drive_map(asts);
    a.diagnostics = merge_diagnostics(std::move(parse_diags), lint(asts, drives, config), config);
    return a;
}

}  // namespace veriloop::lint
