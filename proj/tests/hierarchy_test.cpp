// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "support/test_util.hpp"
#include "veriloop/frontend/parser.hpp"
#include "veriloop/hierarchy/hierarchy.hpp"

using namespace veriloop;
using namespace veriloop::hierarchy;
using veriloop::frontend::ParseResult;

namespace {

DesignManifest pwm_manifest() { return load_manifest_file(testutil::repo_path("corpus/pwm/pwm_manifest.json")); }

std::vector<ParseResult> parse_corpus() {
    std::vector<ParseResult> out;
    uint32_t id = 0;
    for (const auto& p : testutil::pwm_corpus_files()) out.push_back(frontend::parse_source(testutil::read_file(p), id++));
    return out;
}

std::vector<const ParseResult*> ptrs(const std::vector<ParseResult>& v) {
    std::vector<const ParseResult*> out;
    for (const auto& r : v) out.push_back(&r);
    return out;
}

size_t count_code(const HierReport& r, const std::string& code) {
    return static_cast<size_t>(
        std::count_if(r.diagnostics.begin(), r.diagnostics.end(), [&](const Diagnostic& d) { return d.code == code; }));
}

frontend::ModuleDecl* find_module(std::vector<ParseResult>& files, const std::string& name) {
    for (auto& f : files)
        for (auto& m : f.ast.modules)
            if (m.name == name) return &m;
    return nullptr;
}

std::string sources_with(const std::string& file, const std::string& from, const std::string& to) {
    std::string text = testutil::read_file(testutil::repo_path("corpus/pwm/" + file));
    auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    return text.replace(pos, from.size(), to);
}

std::vector<ParseResult> parse_corpus_replacing(const std::string& file, const std::string& text) {
    std::vector<ParseResult> out;
    uint32_t id = 0;
    for (const auto& p : testutil::pwm_corpus_files()) {
        std::string src = p.filename() == file ? text : testutil::read_file(p);
        out.push_back(frontend::parse_source(src, id++));
    }
    return out;
}

constexpr const char* kMinimal = R"({"top":"a","modules":[{"name":"a","ports":[]}]})";

}  // namespace

TEST_CASE("manifest: corpus manifest loads") {
    DesignManifest m = pwm_manifest();
    CHECK(m.top == "pwm_top");
    CHECK(m.modules.size() == 7);
    CHECK(m.clock.name == "clk");
    CHECK(m.reset.name == "rstn");
    CHECK(m.reset.active_low);
    CHECK(m.reset.async);
    const ModuleSpec* top = m.find("pwm_top");
    REQUIRE(top);
    CHECK(top->children.size() == 15);
    REQUIRE(top->find_port("duty"));
    CHECK(top->find_port("duty")->width == 8);

    auto order = m.topological_order();
    REQUIRE(order.size() == 7);
    CHECK(order.back() == "pwm_top");
    // Every child precedes its parent.
    std::map<std::string, size_t> at;
    for (size_t i = 0; i < order.size(); ++i) at[order[i]] = i;
    for (const auto& spec : m.modules)
        for (const auto& c : spec.children) CHECK(at[c.module] < at[spec.name]);
}

TEST_CASE("manifest: minimal and invalid documents") {
    DesignManifest m = load_manifest(kMinimal);
    CHECK(m.modules.size() == 1);
    CHECK(m.topological_order() == std::vector<std::string>{"a"});

    auto message = [](const std::string& text) {
        try {
            load_manifest(text);
        } catch (const ManifestError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    std::string bad_child = message(R"({"top":"a","modules":[{"name":"a","children":[{"module":"ghost","instance":"u"}]}]})");
    CHECK(bad_child.find("ghost") != std::string::npos);

    std::string dup = message(R"({"top":"a","modules":[{"name":"a"},{"name":"a"}]})");
    CHECK(dup.find("duplicate module name 'a'") != std::string::npos);

    std::string dup_port = message(
        R"({"top":"a","modules":[{"name":"a","ports":[{"name":"x","dir":"input"},{"name":"x","dir":"output"}]}]})");
    CHECK(dup_port.find("duplicate port 'x'") != std::string::npos);

    std::string cycle = message(R"({"top":"a","modules":[
        {"name":"a","children":[{"module":"b","instance":"u_b"}]},
        {"name":"b","children":[{"module":"a","instance":"u_a"}]}]})");
    CHECK(cycle.find("cycle") != std::string::npos);
    CHECK(cycle.find("a -> b -> a") != std::string::npos);

    std::string no_top = message(R"({"top":"z","modules":[{"name":"a"}]})");
    CHECK(no_top.find("'z'") != std::string::npos);

    std::string bad_dir = message(R"({"top":"a","modules":[{"name":"a","ports":[{"name":"x","dir":"sideways"}]}]})");
    CHECK(bad_dir.find("sideways") != std::string::npos);

    std::string malformed = message("{\n  \"top\": \"a\",\n  \"modules\": [ oops ]\n}");
    CHECK(malformed.find("line 3") != std::string::npos);
}

TEST_CASE("check: conforming corpus passes with no entries") {
    auto files = parse_corpus();
    HierReport r = check(pwm_manifest(), ptrs(files));
    CHECK(r.pass());
    CHECK(r.diagnostics.empty());
    for (const auto& d : r.diagnostics) MESSAGE(d.code << " " << d.message);
}

TEST_CASE("check: narrowed duty port is one HC002 naming it") {
    auto files = parse_corpus_replacing("pwm_top.v", sources_with("pwm_top.v", "input  wire [7:0] duty", "input  wire [3:0] duty"));
    HierReport r = check(pwm_manifest(), ptrs(files));
    CHECK_FALSE(r.pass());
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].code == "HC002");
    CHECK(r.diagnostics[0].message.find("'duty'") != std::string::npos);
    CHECK(r.diagnostics[0].message.find("width is 4, manifest says 8") != std::string::npos);
}

TEST_CASE("check: any single port mutation yields exactly one HC002 naming the port") {
    DesignManifest man = pwm_manifest();
    size_t trials = 0;
    for (const auto& spec : man.modules) {
        for (size_t pi = 0; pi < spec.ports.size(); ++pi) {
            for (int kind = 0; kind < 3; ++kind) {
                auto files = parse_corpus();
                frontend::ModuleDecl* m = find_module(files, spec.name);
                REQUIRE(m);
                auto it = std::find_if(m->ports.begin(), m->ports.end(),
                                       [&](const frontend::PortDecl& p) { return p.name == spec.ports[pi].name; });
                REQUIRE(it != m->ports.end());
                std::string name = it->name;
                if (kind == 0) {
                    uint32_t w = spec.ports[pi].width + 1;
                    it->range = frontend::Range{frontend::Expr::number(w - 1, 32), frontend::Expr::number(0, 32)};
                } else if (kind == 1) {
                    it->dir = it->dir == frontend::Direction::Input ? frontend::Direction::Output
                                                                    : frontend::Direction::Input;
                } else {
                    it->name = name + "_x";
                }
                HierReport r = check(man, ptrs(files));
                INFO(spec.name << "." << name << " mutation " << kind);
                REQUIRE(r.diagnostics.size() == 1);
                CHECK(r.diagnostics[0].code == "HC002");
                CHECK(r.diagnostics[0].message.find("'" + name + "'") != std::string::npos);
                CHECK_FALSE(r.pass());
                ++trials;
            }
        }
    }
    CHECK(trials >= 3 * 30);
}

TEST_CASE("check: HC003 count equals multiset symmetric difference") {
    DesignManifest man = pwm_manifest();
    const ModuleSpec* top = man.find("pwm_top");
    REQUIRE(top);
    std::mt19937 rng(1234);
    for (int trial = 0; trial < 200; ++trial) {
        auto files = parse_corpus();
        frontend::ModuleDecl* m = find_module(files, "pwm_top");
        REQUIRE(m);
        std::vector<frontend::ModuleItem> items;
        std::vector<frontend::Instantiation> insts;
        for (auto& item : m->items) {
            if (auto* in = std::get_if<frontend::Instantiation>(&item))
                insts.push_back(*in);
            else
                items.push_back(item);
        }
        int ops = 1 + static_cast<int>(rng() % 4);
        for (int k = 0; k < ops; ++k) {
            int op = static_cast<int>(rng() % 4);
            if (insts.empty()) op = 2;
            size_t pick = insts.empty() ? 0 : rng() % insts.size();
            if (op == 0) {
                insts.erase(insts.begin() + static_cast<long>(pick));
            } else if (op == 1) {
                insts.push_back(insts[pick]);
            } else if (op == 2) {
                frontend::Instantiation extra = insts.empty() ? frontend::Instantiation{} : insts[pick];
                extra.module_name = extra.module_name.empty() ? "dff" : extra.module_name;
                extra.instance_name = "u_extra" + std::to_string(rng() % 3);
                insts.push_back(extra);
            } else {
                insts[pick].instance_name += "_r";
            }
        }
        for (auto& in : insts) items.push_back(in);
        m->items = items;

        std::map<std::pair<std::string, std::string>, long> balance;
        for (const auto& c : top->children) ++balance[{c.module, c.instance}];
        for (const auto& in : insts) --balance[{in.module_name, in.instance_name}];
        size_t expect = 0;
        for (const auto& [k, v] : balance) expect += static_cast<size_t>(std::labs(v));

        HierReport r = check(man, ptrs(files));
        CHECK(count_code(r, "HC003") == expect);
        CHECK(r.pass() == (expect == 0));
    }
}

TEST_CASE("check: HC004 helper module is a warning") {
    auto files = parse_corpus();
    files.push_back(frontend::parse_source("module helper(input a, output b); assign b = a; endmodule\n",
                                           static_cast<uint32_t>(files.size())));
    HierReport r = check(pwm_manifest(), ptrs(files));
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].code == "HC004");
    CHECK(r.diagnostics[0].severity == Severity::Warning);
    CHECK(r.pass());

    HierConfig strict;
    strict.undeclared_is_error = true;
    CHECK_FALSE(check(pwm_manifest(), ptrs(files), strict).pass());
}

TEST_CASE("check: HC001 for absent and erroneous modules") {
    auto files = parse_corpus();
    std::vector<const ParseResult*> some;
    for (const auto& f : files)
        if (f.ast.modules.empty() || f.ast.modules[0].name != "dff") some.push_back(&f);
    HierReport r = check(pwm_manifest(), some);
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].code == "HC001");
    CHECK(r.diagnostics[0].span.file == kManifestFile);
    CHECK(r.diagnostics[0].message.find("'dff'") != std::string::npos);

    auto broken = parse_corpus_replacing("dff.v", sources_with("dff.v", "q <= en & d;", "q <= en & ;"));
    HierReport r2 = check(pwm_manifest(), ptrs(broken));
    CHECK(count_code(r2, "HC001") == 1);
    CHECK_FALSE(r2.pass());
}

TEST_CASE("check: HC005 clock and reset conformance") {
    auto expect_hc005 = [](const std::string& from, const std::string& to) {
        auto files = parse_corpus_replacing("dff.v", sources_with("dff.v", from, to));
        HierReport r = check(pwm_manifest(), ptrs(files));
        INFO(from << " -> " << to);
        CHECK(count_code(r, "HC005") == 1);
        CHECK_FALSE(r.pass());
    };
    expect_hc005("posedge clk", "negedge clk");
    expect_hc005("negedge rstn", "posedge rstn");
    expect_hc005("if (!rstn)", "if (rstn)");

    // Synchronous reset against an async manifest.
    auto files = parse_corpus_replacing("dff.v", sources_with("dff.v", " or negedge rstn", ""));
    CHECK(count_code(check(pwm_manifest(), ptrs(files)), "HC005") == 1);

    // Same design against a manifest that asks for a synchronous reset.
    DesignManifest sync = pwm_manifest();
    sync.reset.async = false;
    HierReport rs = check(sync, ptrs(files));
    for (const auto& d : rs.diagnostics) CHECK(d.message.find("module 'dff'") == std::string::npos);
    // The untouched sequential modules keep their async reset.
    CHECK(count_code(rs, "HC005") == 3);
    // Clock renamed consistently: one HC005 per process plus the port rename.
    DesignManifest other = pwm_manifest();
    other.clock.name = "clock";
    auto corpus = parse_corpus();
    HierReport r = check(other, ptrs(corpus));
    CHECK(count_code(r, "HC005") >= 1);
}

TEST_CASE("check: verdict does not depend on file order") {
    auto files = parse_corpus_replacing("pwm_top.v", sources_with("pwm_top.v", "input  wire [7:0] duty", "input  wire [3:0] duty"));
    files.push_back(frontend::parse_source("module helper(input a); endmodule\n", static_cast<uint32_t>(files.size())));
    auto p = ptrs(files);
    HierReport base = check(pwm_manifest(), p);
    auto key = [](const HierReport& r) {
        std::multiset<std::string> s;
        for (const auto& d : r.diagnostics) s.insert(d.code + d.message);
        return s;
    };
    std::mt19937 rng(7);
    for (int i = 0; i < 20; ++i) {
        std::shuffle(p.begin(), p.end(), rng);
        HierReport r = check(pwm_manifest(), p);
        CHECK(r.pass() == base.pass());
        CHECK(key(r) == key(base));
    }
}

TEST_CASE("check_module: scoped to one target") {
    auto files = parse_corpus();
    std::vector<const ParseResult*> just_dff;
    for (const auto& f : files)
        if (!f.ast.modules.empty() && f.ast.modules[0].name == "dff") just_dff.push_back(&f);
    REQUIRE(just_dff.size() == 1);
    HierReport r = check_module(pwm_manifest(), "dff", just_dff);
    CHECK(r.pass());
    CHECK(r.diagnostics.empty());
}
