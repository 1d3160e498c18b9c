// SPDX-License-Identifier: Apache-2.0
#include "veriloop/hierarchy/hierarchy.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "veriloop/frontend/consteval.hpp"

namespace veriloop::hierarchy {

using namespace frontend;

namespace {

struct SourceModule {
    const ModuleDecl* decl = nullptr;
    bool clean = false;
};

bool span_contains(const Span& outer, const Span& inner) {
    return outer.file == inner.file && inner.start >= outer.start && inner.start < std::max(outer.end, outer.start + 1);
}

// First clean definition of each module name wins; otherwise the first one seen.
std::map<std::string, SourceModule, std::less<>> collect(const std::vector<const ParseResult*>& files) {
    std::map<std::string, SourceModule, std::less<>> out;
    for (const ParseResult* pr : files) {
        for (const auto& m : pr->ast.modules) {
            bool clean = std::none_of(pr->diagnostics.begin(), pr->diagnostics.end(), [&](const Diagnostic& d) {
                return d.is_error() && span_contains(m.span, d.span);
            });
            // A recovery inside the module also disqualifies it.
            clean = clean && std::none_of(pr->ast.recoveries.begin(), pr->ast.recoveries.end(),
                                          [&](const RecoveryEvent& r) { return span_contains(m.span, r.span); });
            auto it = out.find(m.name);
            if (it == out.end())
                out.emplace(m.name, SourceModule{&m, clean});
            else if (!it->second.clean && clean)
                it->second = SourceModule{&m, clean};
        }
    }
    return out;
}

Diagnostic make(std::string code, Severity sev, Span span, std::string msg, std::string hint = {}) {
    Diagnostic d;
    d.code = std::move(code);
    d.severity = sev;
    d.span = span;
    d.message = std::move(msg);
    d.hint = std::move(hint);
    return d;
}

Span manifest_span() {
    Span s;
    s.file = kManifestFile;
    return s;
}

std::string dir_str(Direction d) { return std::string(direction_name(d)); }

void check_ports(const ModuleSpec& spec, const ModuleDecl& decl, std::vector<Diagnostic>& out) {
    ParamEnv env = module_params(decl);
    std::vector<bool> used(decl.ports.size(), false);
    std::vector<const PortSpec*> unmatched_spec;
    std::vector<size_t> spec_index;

    auto compare = [&](const PortSpec& ps, const PortDecl& pd, const std::string& label) {
        std::vector<std::string> problems;
        if (pd.dir != ps.dir)
            problems.push_back("direction is " + dir_str(pd.dir) + ", manifest says " + dir_str(ps.dir));
        auto w = range_width(pd.range, env);
        if (!w || *w != ps.width)
            problems.push_back("width is " + (w ? std::to_string(*w) : std::string("unknown")) +
                               ", manifest says " + std::to_string(ps.width));
        return problems.empty() ? std::string() : label + ": " + [&] {
            std::string s;
            for (size_t i = 0; i < problems.size(); ++i) s += (i ? "; " : "") + problems[i];
            return s;
        }();
    };

    for (size_t i = 0; i < spec.ports.size(); ++i) {
        const PortSpec& ps = spec.ports[i];
        auto it = std::find_if(decl.ports.begin(), decl.ports.end(), [&](const PortDecl& p) { return p.name == ps.name; });
        if (it == decl.ports.end()) {
            unmatched_spec.push_back(&ps);
            spec_index.push_back(i);
            continue;
        }
        used[static_cast<size_t>(it - decl.ports.begin())] = true;
        std::string msg = compare(ps, *it, "port '" + ps.name + "' of module '" + spec.name + "'");
        if (!msg.empty()) out.push_back(make("HC002", Severity::Error, it->span, msg));
    }
    std::vector<size_t> extra;
    for (size_t i = 0; i < decl.ports.size(); ++i)
        if (!used[i]) extra.push_back(i);

    // A source port at the same position as a missing manifest port is taken
    // to be a rename, reported once.
    std::vector<bool> extra_taken(extra.size(), false);
    for (size_t k = 0; k < unmatched_spec.size(); ++k) {
        const PortSpec& ps = *unmatched_spec[k];
        size_t pos = spec_index[k];
        std::optional<size_t> pick;
        for (size_t e = 0; e < extra.size(); ++e)
            if (!extra_taken[e] && extra[e] == pos) pick = e;
        if (!pick && unmatched_spec.size() == 1 && extra.size() == 1) pick = 0;
        if (pick) {
            extra_taken[*pick] = true;
            const PortDecl& pd = decl.ports[extra[*pick]];
            std::string msg = "port '" + ps.name + "' of module '" + spec.name + "' is named '" + pd.name +
                              "' in the source";
            std::string more = compare(ps, pd, "");
            if (!more.empty()) msg += ", and its " + more.substr(2);
            out.push_back(make("HC002", Severity::Error, pd.span, msg, "rename it to '" + ps.name + "'"));
            continue;
        }
        out.push_back(make("HC002", Severity::Error, decl.name_span,
                           "module '" + spec.name + "' lacks port '" + ps.name + "' (" + dir_str(ps.dir) + ", " +
                               std::to_string(ps.width) + " bit)"));
    }
    for (size_t e = 0; e < extra.size(); ++e) {
        if (extra_taken[e]) continue;
        const PortDecl& pd = decl.ports[extra[e]];
        out.push_back(make("HC002", Severity::Error, pd.span,
                           "port '" + pd.name + "' of module '" + spec.name + "' is not in the manifest"));
    }
}

void check_instances(const ModuleSpec& spec, const ModuleDecl& decl, std::vector<Diagnostic>& out) {
    using Key = std::pair<std::string, std::string>;  // (module, instance)
    std::map<Key, std::vector<const Instantiation*>> actual;
    for (const auto& item : decl.items)
        if (const auto* inst = std::get_if<Instantiation>(&item))
            actual[{inst->module_name, inst->instance_name}].push_back(inst);
    std::map<Key, size_t> declared;
    for (const auto& c : spec.children) ++declared[{c.module, c.instance}];

    for (const auto& [key, n] : declared) {
        size_t have = actual.count(key) ? actual[key].size() : 0;
        for (size_t i = have; i < n; ++i)
            out.push_back(make("HC003", Severity::Error, decl.name_span,
                               "module '" + spec.name + "' is missing instance '" + key.second + "' of '" +
                                   key.first + "'"));
    }
    for (const auto& [key, insts] : actual) {
        size_t want = declared.count(key) ? declared[key] : 0;
        for (size_t i = want; i < insts.size(); ++i) {
            bool dup = want > 0;
            out.push_back(make("HC003", Severity::Error, insts[i]->span,
                               dup ? "instance '" + key.second + "' of '" + key.first + "' is duplicated in module '" +
                                         spec.name + "'"
                                   : "instance '" + key.second + "' of '" + key.first + "' in module '" + spec.name +
                                         "' is not declared in the manifest"));
        }
    }
}

const Statement* first_if(const Statement& s) {
    if (s.kind == StmtKind::If) return &s;
    if (s.kind == StmtKind::Block && !s.body.empty()) return first_if(s.body.front());
    return nullptr;
}

bool mentions(const Expr& e, std::string_view name) {
    bool hit = false;
    for_each_expr(e, [&](const Expr& x) {
        if (!x.name.empty() && x.name == name && x.kind != ExprKind::MacroRef) hit = true;
    });
    return hit;
}

// Returns true/false when `cond` clearly tests for the reset level given by
// `active_low`, nullopt when the shape is not recognised.
std::optional<bool> tests_active_level(const Expr& cond, std::string_view name, bool active_low) {
    if (cond.kind == ExprKind::Identifier && cond.name == name) return !active_low;
    if (cond.kind == ExprKind::Unary && (cond.op == "!" || cond.op == "~") && cond.operands.size() == 1 &&
        cond.operands[0].kind == ExprKind::Identifier && cond.operands[0].name == name)
        return active_low;
    if (cond.kind == ExprKind::Binary && (cond.op == "==" || cond.op == "!=") && cond.operands.size() == 2) {
        const Expr* id = nullptr;
        const Expr* lit = nullptr;
        for (int i = 0; i < 2; ++i) {
            if (cond.operands[i].kind == ExprKind::Identifier && cond.operands[i].name == name) id = &cond.operands[i];
            if (cond.operands[i].kind == ExprKind::Number) lit = &cond.operands[i];
        }
        if (id && lit && lit->literal.xz_mask == 0) {
            bool one = lit->literal.value != 0;
            bool tests_high = (cond.op == "==") == one;
            return tests_high != active_low;
        }
    }
    return std::nullopt;
}

void check_clock_reset(const DesignManifest& man, const ModuleDecl& decl, std::vector<Diagnostic>& out) {
    const std::string& clk = man.clock.name;
    const ResetSpec& rst = man.reset;
    std::string want_edge = rst.active_low ? "negedge" : "posedge";
    for (const auto& item : decl.items) {
        const auto* ab = std::get_if<AlwaysBlock>(&item);
        if (!ab) continue;
        std::vector<const EdgeEvent*> edges;
        for (const auto& ev : ab->sensitivity.events)
            if (ev.edge != EdgeKind::Level) edges.push_back(&ev);
        if (edges.empty()) continue;
        auto hc5 = [&](const Span& sp, std::string msg) {
            out.push_back(make("HC005", Severity::Error, sp, "module '" + decl.name + "': " + msg));
        };
        if (edges.size() > 2) {
            hc5(ab->sensitivity.span, "process is sensitive to more than one clock");
            continue;
        }
        const Statement* guard = first_if(ab->body);
        const EdgeEvent* clock_ev = nullptr;
        const EdgeEvent* reset_ev = nullptr;
        if (edges.size() == 1) {
            clock_ev = edges[0];
        } else {
            // The reset event is the one the leading if tests; failing that,
            // the one that is not the manifest clock.
            for (const EdgeEvent* ev : edges)
                if (guard && mentions(guard->value, ev->signal)) reset_ev = ev;
            if (!reset_ev)
                for (const EdgeEvent* ev : edges)
                    if (ev->signal != clk) reset_ev = ev;
            if (!reset_ev) reset_ev = edges[1];
            clock_ev = edges[0] == reset_ev ? edges[1] : edges[0];
        }
        if (clock_ev->signal != clk)
            hc5(clock_ev->span, "clock is '" + clock_ev->signal + "', manifest clock is '" + clk + "'");
        else if (clock_ev->edge != EdgeKind::Posedge)
            hc5(clock_ev->span, "clock '" + clk + "' is used on its falling edge");

        if (reset_ev) {
            if (reset_ev->signal != rst.name) {
                hc5(reset_ev->span, "reset is '" + reset_ev->signal + "', manifest reset is '" + rst.name + "'");
            } else if (!rst.async) {
                hc5(reset_ev->span, "reset '" + rst.name + "' is asynchronous, manifest requires a synchronous reset");
            } else {
                std::string have = reset_ev->edge == EdgeKind::Posedge ? "posedge" : "negedge";
                if (have != want_edge)
                    hc5(reset_ev->span, "reset '" + rst.name + "' is active " + (rst.active_low ? "low" : "high") +
                                            " but the process uses " + have);
                else if (guard && tests_active_level(guard->value, rst.name, rst.active_low) == false)
                    hc5(guard->value.span, "reset '" + rst.name + "' is tested with the wrong polarity");
            }
        } else if (guard && mentions(guard->value, rst.name)) {
            if (rst.async)
                hc5(guard->value.span, "reset '" + rst.name + "' is synchronous, manifest requires an asynchronous reset");
            else if (tests_active_level(guard->value, rst.name, rst.active_low) == false)
                hc5(guard->value.span, "reset '" + rst.name + "' is tested with the wrong polarity");
        }
    }
}

void check_one(const DesignManifest& man, const ModuleSpec& spec,
               const std::map<std::string, SourceModule, std::less<>>& src, std::vector<Diagnostic>& out) {
    auto it = src.find(spec.name);
    if (it == src.end()) {
        out.push_back(make("HC001", Severity::Error, manifest_span(),
                           "module '" + spec.name + "' is declared in the manifest but not defined in the sources"));
        return;
    }
    if (!it->second.clean) {
        out.push_back(make("HC001", Severity::Error, it->second.decl->name_span,
                           "module '" + spec.name + "' has errors and was not checked"));
        return;
    }
    const ModuleDecl& decl = *it->second.decl;
    check_ports(spec, decl, out);
    check_instances(spec, decl, out);
    check_clock_reset(man, decl, out);
}

void check_undeclared(const DesignManifest& man, const std::map<std::string, SourceModule, std::less<>>& src,
                      const HierConfig& cfg, std::vector<Diagnostic>& out) {
    for (const auto& [name, sm] : src)
        if (!man.find(name))
            out.push_back(make("HC004", cfg.undeclared_is_error ? Severity::Error : Severity::Warning,
                               sm.decl->name_span, "module '" + name + "' is not declared in the manifest"));
}

}  // namespace

HierReport check(const DesignManifest& manifest, const std::vector<const ParseResult*>& files,
                 const HierConfig& config) {
    auto src = collect(files);
    HierReport r;
    for (const auto& spec : manifest.modules) check_one(manifest, spec, src, r.diagnostics);
    check_undeclared(manifest, src, config, r.diagnostics);
    sort_diagnostics(r.diagnostics);
    return r;
}

HierReport check_module(const DesignManifest& manifest, std::string_view module,
                        const std::vector<const ParseResult*>& files, const HierConfig& config) {
    auto src = collect(files);
    HierReport r;
    if (const ModuleSpec* spec = manifest.find(module)) check_one(manifest, *spec, src, r.diagnostics);
    check_undeclared(manifest, src, config, r.diagnostics);
    sort_diagnostics(r.diagnostics);
    return r;
}

}  // namespace veriloop::hierarchy
