// SPDX-License-Identifier: Apache-2.0
#include "veriloop/lint/drive_map.hpp"

#include <algorithm>

#include "veriloop/frontend/consteval.hpp"

namespace veriloop::lint {

using namespace frontend;

std::string_view drive_kind_name(DriveKind k) {
    switch (k) {
    case DriveKind::Blocking: return "blocking";
    case DriveKind::Nonblocking: return "nonblocking";
    case DriveKind::Continuous: return "continuous";
    case DriveKind::PortConnection: return "port connection";
    }
    return "?";
}

const ModuleDrives* DriveMap::find(std::string_view module) const {
    for (const auto& m : modules)
        if (m.module == module) return &m;
    return nullptr;
}

bool sites_overlap(const DriveSite& a, const DriveSite& b) {
    if (!a.bits || !b.bits) return true;
    return a.bits->overlaps(*b.bits);
}

namespace {

class Builder {
public:
    Builder(const ModuleDecl& mod, const std::map<std::string, const ModuleDecl*>& known)
        : mod_(mod), known_(known), env_(module_params(mod)) {
        out_.module = mod.name;
    }

    ModuleDrives run() {
        for (const auto& item : mod_.items) {
            std::visit([&](const auto& it) { this->item(it); }, item);
        }
        for (auto& [name, sites] : out_.signals)
            std::stable_sort(sites.begin(), sites.end(),
                             [](const DriveSite& a, const DriveSite& b) { return a.span.start < b.span.start; });
        return std::move(out_);
    }

private:
    const ModuleDecl& mod_;
    const std::map<std::string, const ModuleDecl*>& known_;
    ParamEnv env_;
    ModuleDrives out_;

    size_t open_process(ProcessKind kind, const Span& span) {
        out_.processes.push_back({kind, span});
        return out_.processes.size() - 1;
    }

    void record(const Expr& lv, size_t process, DriveKind kind) {
        switch (lv.kind) {
        case ExprKind::Identifier: add(lv.name, std::nullopt, lv.span, process, kind); return;
        case ExprKind::BitSelect: {
            auto idx = eval_const(lv.operands.at(0), env_);
            std::optional<BitRange> bits;
            if (idx && *idx < (uint64_t{1} << 31)) bits = BitRange{uint32_t(*idx), uint32_t(*idx)};
            add(lv.name, bits, lv.span, process, kind);
            return;
        }
        case ExprKind::PartSelect: {
            auto msb = eval_const(lv.operands.at(0), env_), lsb = eval_const(lv.operands.at(1), env_);
            std::optional<BitRange> bits;
            if (msb && lsb && *msb < (uint64_t{1} << 31) && *lsb < (uint64_t{1} << 31))
                bits = BitRange{uint32_t(std::min(*msb, *lsb)), uint32_t(std::max(*msb, *lsb))};
            add(lv.name, bits, lv.span, process, kind);
            return;
        }
        case ExprKind::Concat:
            for (const auto& e : lv.operands) record(e, process, kind);
            return;
        default: return;  // recovered or macro placeholder
        }
    }

    void add(const std::string& name, std::optional<BitRange> bits, const Span& span, size_t process,
             DriveKind kind) {
        out_.signals[name].push_back(DriveSite{process, kind, bits, span});
    }

    void walk(const Statement& s, size_t process) {
        for_each_statement(s, [&](const Statement& st) {
            if (st.kind == StmtKind::Blocking) record(st.target, process, DriveKind::Blocking);
            if (st.kind == StmtKind::Nonblocking) record(st.target, process, DriveKind::Nonblocking);
        });
    }

    void item(const NetDecl& n) {
        if (!n.init) return;
        // `wire w = expr;` is a continuous assignment; `reg r = v;` an initializer.
        ProcessKind pk = n.type == NetType::Wire ? ProcessKind::Assign : ProcessKind::NetInit;
        size_t p = open_process(pk, n.span);
        add(n.name, std::nullopt, n.span, p, n.type == NetType::Wire ? DriveKind::Continuous : DriveKind::Blocking);
    }
    void item(const ParamDecl&) {}
    void item(const ContinuousAssign& a) {
        size_t p = open_process(ProcessKind::Assign, a.span);
        record(a.lhs, p, DriveKind::Continuous);
    }
    void item(const AlwaysBlock& a) { walk(a.body, open_process(ProcessKind::Always, a.span)); }
    void item(const InitialBlock& b) { walk(b.body, open_process(ProcessKind::Initial, b.span)); }
    void item(const Instantiation& inst) {
        auto it = known_.find(inst.module_name);
        if (it == known_.end()) return;
        const ModuleDecl& child = *it->second;
        size_t p = open_process(ProcessKind::Instance, inst.span);
        for (size_t i = 0; i < inst.ports.size(); ++i) {
            const auto& c = inst.ports[i];
            if (!c.expr) continue;
            const PortDecl* port = nullptr;
            if (c.port.empty()) {
                if (i < child.ports.size()) port = &child.ports[i];
            } else {
                port = child.find_port(c.port);
            }
            if (port && port->dir != Direction::Input) record(*c.expr, p, DriveKind::PortConnection);
        }
    }
};

}  // namespace

DriveMap build_drive_map(const std::vector<const Ast*>& asts) {
    std::map<std::string, const ModuleDecl*> known;
    for (const Ast* ast : asts)
        for (const auto& m : ast->modules) known.emplace(m.name, &m);
    DriveMap out;
    for (const Ast* ast : asts)
        for (const auto& m : ast->modules) out.modules.push_back(Builder(m, known).run());
    return out;
}

DriveMap build_drive_map(const Ast& ast) { return build_drive_map(std::vector<const Ast*>{&ast}); }

}  // namespace veriloop::lint
