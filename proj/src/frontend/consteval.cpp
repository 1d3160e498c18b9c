// SPDX-License-Identifier: Apache-2.0
#include "veriloop/frontend/consteval.hpp"

#include <algorithm>

namespace veriloop::frontend {

namespace {

uint64_t mask_of(uint64_t width) {
    return width >= 64 ? ~uint64_t{0} : (uint64_t{1} << width) - 1;
}

}  // namespace

std::optional<uint64_t> eval_const(const Expr& e, const ParamEnv& env) {
    auto sub = [&](size_t i) { return eval_const(e.operands.at(i), env); };
    switch (e.kind) {
    case ExprKind::Number:
        if (e.literal.xz_mask != 0 || e.literal.overflow) return std::nullopt;
        return e.literal.value;
    case ExprKind::Identifier: {
        auto it = env.find(e.name);
        if (it == env.end()) return std::nullopt;
        return it->second;
    }
    case ExprKind::BitSelect: {
        auto it = env.find(e.name);
        auto idx = sub(0);
        if (it == env.end() || !idx || *idx >= 64) return std::nullopt;
        return (it->second >> *idx) & 1;
    }
    case ExprKind::PartSelect: {
        auto it = env.find(e.name);
        auto msb = sub(0), lsb = sub(1);
        if (it == env.end() || !msb || !lsb || *msb < *lsb || *msb >= 64) return std::nullopt;
        return (it->second >> *lsb) & mask_of(*msb - *lsb + 1);
    }
    case ExprKind::Unary: {
        auto v = sub(0);
        if (!v) return std::nullopt;
        const std::string& op = e.op;
        if (op == "+") return *v;
        if (op == "-") return uint64_t{0} - *v;
        if (op == "!") return uint64_t{*v == 0};
        if (op == "~") return ~*v;
        return std::nullopt;  // reductions need a width
    }
    case ExprKind::Binary: {
        auto a = sub(0), b = sub(1);
        if (!a || !b) return std::nullopt;
        const std::string& op = e.op;
        if (op == "+") return *a + *b;
        if (op == "-") return *a - *b;
        if (op == "*") return *a * *b;
        if (op == "/") return *b == 0 ? std::nullopt : std::optional<uint64_t>(*a / *b);
        if (op == "%") return *b == 0 ? std::nullopt : std::optional<uint64_t>(*a % *b);
        if (op == "**") {
            uint64_t r = 1;
            for (uint64_t i = 0; i < *b && i < 64; ++i) r *= *a;
            return r;
        }
        if (op == "<<" || op == "<<<") return *b >= 64 ? 0 : *a << *b;
        if (op == ">>" || op == ">>>") return *b >= 64 ? 0 : *a >> *b;
        if (op == "&") return *a & *b;
        if (op == "|") return *a | *b;
        if (op == "^") return *a ^ *b;
        if (op == "==" || op == "===") return uint64_t{*a == *b};
        if (op == "!=" || op == "!==") return uint64_t{*a != *b};
        if (op == "<") return uint64_t{*a < *b};
        if (op == "<=") return uint64_t{*a <= *b};
        if (op == ">") return uint64_t{*a > *b};
        if (op == ">=") return uint64_t{*a >= *b};
        if (op == "&&") return uint64_t{*a != 0 && *b != 0};
        if (op == "||") return uint64_t{*a != 0 || *b != 0};
        return std::nullopt;
    }
    case ExprKind::Ternary: {
        auto c = sub(0);
        if (!c) return std::nullopt;
        return *c ? sub(1) : sub(2);
    }
    default:
        return std::nullopt;
    }
}

std::optional<uint32_t> range_width(const std::optional<Range>& range, const ParamEnv& env) {
    if (!range) return 1;
    auto msb = eval_const(range->msb, env);
    auto lsb = eval_const(range->lsb, env);
    if (!msb || !lsb) return std::nullopt;
    uint64_t hi = std::max(*msb, *lsb), lo = std::min(*msb, *lsb);
    if (hi - lo >= (uint64_t{1} << 20)) return std::nullopt;
    return static_cast<uint32_t>(hi - lo + 1);
}

ParamEnv module_params(const ModuleDecl& module, const ParamEnv& overrides) {
    ParamEnv env;
    auto bind = [&](const ParamDecl& p) {
        std::optional<uint64_t> v;
        if (!p.local) {
            auto it = overrides.find(p.name);
            if (it != overrides.end()) v = it->second;
        }
        if (!v) v = eval_const(p.value, env);
        if (!v) return;
        if (p.range) {
            if (auto w = range_width(p.range, env)) *v &= mask_of(*w);
        }
        env[p.name] = *v;
    };
    for (const auto& p : module.params) bind(p);
    for (const auto& item : module.items)
        if (auto p = std::get_if<ParamDecl>(&item)) bind(*p);
    return env;
}

WidthTable declared_widths(const ModuleDecl& module, const ParamEnv& env) {
    WidthTable out;
    for (const auto& p : module.ports) out[p.name] = range_width(p.range, env).value_or(1);
    for (const auto& item : module.items) {
        if (auto n = std::get_if<NetDecl>(&item))
            out[n->name] = n->type == NetType::Integer ? 32 : range_width(n->range, env).value_or(1);
    }
    return out;
}

uint32_t self_width(const Expr& e, const WidthTable& widths, const ParamEnv& env) {
    auto sub = [&](size_t i) { return self_width(e.operands.at(i), widths, env); };
    switch (e.kind) {
    case ExprKind::Identifier: {
        auto it = widths.find(e.name);
        if (it != widths.end()) return it->second;
        return env.count(e.name) ? 32 : 1;
    }
    case ExprKind::Number: return e.literal.width;
    case ExprKind::BitSelect: return 1;
    case ExprKind::PartSelect: {
        auto msb = eval_const(e.operands.at(0), env), lsb = eval_const(e.operands.at(1), env);
        if (!msb || !lsb) return 1;
        return static_cast<uint32_t>((*msb > *lsb ? *msb - *lsb : *lsb - *msb) + 1);
    }
    case ExprKind::Concat: {
        uint32_t w = 0;
        for (size_t i = 0; i < e.operands.size(); ++i) w += sub(i);
        return w;
    }
    case ExprKind::Replicate: {
        uint32_t w = 0;
        for (size_t i = 1; i < e.operands.size(); ++i) w += sub(i);
        auto n = eval_const(e.operands.at(0), env);
        return w * static_cast<uint32_t>(n.value_or(1));
    }
    case ExprKind::Unary:
        if (e.op == "~" || e.op == "-" || e.op == "+") return sub(0);
        return 1;
    case ExprKind::Binary: {
        const std::string& op = e.op;
        if (op == "==" || op == "!=" || op == "===" || op == "!==" || op == "<" || op == "<=" ||
            op == ">" || op == ">=" || op == "&&" || op == "||")
            return 1;
        if (op == "<<" || op == ">>" || op == "<<<" || op == ">>>" || op == "**") return sub(0);
        return std::max(sub(0), sub(1));
    }
    case ExprKind::Ternary: return std::max(sub(1), sub(2));
    default: return 1;
    }
}

}  // namespace veriloop::frontend
