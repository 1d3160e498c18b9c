// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <random>
#include <set>

#include "json.hpp"
#include "support/program_gen.hpp"
#include "support/test_util.hpp"
#include "veriloop/lint/lint.hpp"

using namespace veriloop;
using veriloop::lint::analyze;
using veriloop::lint::Analysis;
using veriloop::lint::build_drive_map;
using veriloop::lint::BitRange;
using veriloop::lint::DriveKind;
using veriloop::lint::Format;
using veriloop::lint::LintConfig;
using veriloop::lint::render_diagnostics;
using veriloop::lint::rules;

namespace {

struct Linted {
    SourceManager sources;
    Analysis analysis;
};

Linted run(const std::string& text, const LintConfig& config = {}) {
    Linted l;
    l.sources.add("input.v", text);
    l.analysis = analyze(l.sources, {}, config);
    return l;
}

Linted run_file(const std::string& rel, const LintConfig& config = {}) {
    Linted l;
    l.sources.load(testutil::repo_path(rel));
    l.analysis = analyze(l.sources, {}, config);
    return l;
}

std::vector<const Diagnostic*> with_code(const std::vector<Diagnostic>& diags, std::string_view code) {
    std::vector<const Diagnostic*> out;
    for (const auto& d : diags)
        if (d.code == code) out.push_back(&d);
    return out;
}

std::vector<Diagnostic> lint_only(const std::string& text, const LintConfig& config = {}) {
    auto r = frontend::parse_source(text);
    return veriloop::lint::lint(r.ast, build_drive_map(r.ast), config);
}

}  // namespace

TEST_CASE("drive map: two always blocks assigning q") {
    auto r = frontend::parse_source(
        "module m(input clk, input a, output reg q);\nalways @(posedge clk) q <= a;\nalways @(posedge clk) q <= ~a;\n"
        "endmodule\n");
    auto dm = build_drive_map(r.ast);
    const auto& sites = dm.find("m")->signals.at("q");
    REQUIRE(sites.size() == 2);
    CHECK(sites[0].process != sites[1].process);
    CHECK(sites[0].kind == DriveKind::Nonblocking);
}

TEST_CASE("drive map: default assignment plus case arms share one process") {
    auto r = frontend::parse_source(testutil::read_file(testutil::repo_path("corpus/listings/listing3_multi_drive.v")));
    auto dm = build_drive_map(r.ast);
    const auto& sites = dm.find("listing3")->signals.at("out");
    REQUIRE(sites.size() >= 2);
    for (const auto& s : sites) {
        CHECK(s.process == sites[0].process);
        REQUIRE(s.bits.has_value());
        CHECK(*s.bits == BitRange{0, 1});
    }
}

TEST_CASE("drive map: unique continuous assigns give one site each") {
    auto r = frontend::parse_source(
        "module m(input a, input b, output x, output [1:0] y);\nassign x = a;\nassign y[0] = b;\nassign y[1] = a;\n"
        "endmodule\n");
    auto dm = build_drive_map(r.ast);
    const auto* md = dm.find("m");
    CHECK(md->signals.at("x").size() == 1);
    CHECK(md->signals.at("y").size() == 2);
    CHECK(*md->signals.at("y")[1].bits == BitRange{1, 1});
    CHECK(veriloop::lint::lint(r.ast, dm, {}).empty());
}

TEST_CASE("property: every assignment lvalue appears exactly once in the drive map") {
    testutil::ProgramGen gen(99);
    for (int i = 0; i < 60; ++i) {
        auto r = frontend::parse_source(gen.program());
        REQUIRE(r.diagnostics.empty());
        auto dm = build_drive_map(r.ast);
        for (const auto& mod : r.ast.modules) {
            std::multiset<std::pair<std::string, uint32_t>> expected;
            auto add_lv = [&](const frontend::Expr& lv, auto&& self) -> void {
                if (lv.kind == frontend::ExprKind::Concat) {
                    for (const auto& e : lv.operands) self(e, self);
                } else {
                    expected.emplace(lv.name, lv.span.start);
                }
            };
            for (const auto& item : mod.items) {
                if (auto a = std::get_if<frontend::ContinuousAssign>(&item)) add_lv(a->lhs, add_lv);
                if (auto a = std::get_if<frontend::AlwaysBlock>(&item))
                    frontend::for_each_statement(a->body, [&](const frontend::Statement& s) {
                        if (s.kind == frontend::StmtKind::Blocking || s.kind == frontend::StmtKind::Nonblocking)
                            add_lv(s.target, add_lv);
                    });
            }
            std::multiset<std::pair<std::string, uint32_t>> actual;
            for (const auto& [sig, sites] : dm.find(mod.name)->signals)
                for (const auto& s : sites)
                    if (s.kind != DriveKind::PortConnection) actual.emplace(sig, s.span.start);
            CHECK(expected == actual);
        }
    }
}

TEST_CASE("LLM001 on the brace that closes a begin block") {
    auto l = run_file("corpus/listings/listing1_begin_end.v");
    auto hits = with_code(l.analysis.diagnostics, "LLM001");
    REQUIRE(hits.size() == 1);
    CHECK(hits[0]->span.line == 7);
    CHECK(hits[0]->span.col == 1);
    CHECK(with_code(l.analysis.diagnostics, "SYN000").empty());
}

TEST_CASE("LLM002 on the end that terminates a case") {
    auto l = run_file("corpus/listings/listing2_case_endcase.v");
    auto hits = with_code(l.analysis.diagnostics, "LLM002");
    REQUIRE(hits.size() == 1);
    CHECK(hits[0]->span.line == 11);
    CHECK(with_code(l.analysis.diagnostics, "LLM001").empty());
    CHECK(with_code(l.analysis.diagnostics, "PRE001").size() == 1);
}

TEST_CASE("LLM003 intra-process is off by default and a warning when enabled") {
    auto quiet = run_file("corpus/listings/listing3_multi_drive.v");
    CHECK(with_code(quiet.analysis.diagnostics, "LLM003").empty());
    CHECK_FALSE(has_errors(quiet.analysis.diagnostics));

    LintConfig cfg;
    cfg.intra_process_multi_drive = true;
    auto l = run_file("corpus/listings/listing3_multi_drive.v", cfg);
    auto hits = with_code(l.analysis.diagnostics, "LLM003");
    REQUIRE(hits.size() == 1);
    CHECK(hits[0]->severity == Severity::Warning);
    CHECK(hits[0]->span.line == 11);
    CHECK(hits[0]->message.find("'out'") != std::string::npos);
    CHECK(hits[0]->related.size() == 2);  // default at line 9, second arm at line 12
}

TEST_CASE("LLM003 cross-process is an error listing every site") {
    auto diags = lint_only(
        "module m(input clk, input a, output reg q, output w);\nalways @(posedge clk) q <= a;\n"
        "always @(posedge clk) q <= ~a;\nassign w = a;\nassign w = ~a;\nendmodule\n");
    auto hits = with_code(diags, "LLM003");
    REQUIRE(hits.size() == 2);
    for (const auto* d : hits) {
        CHECK(d->severity == Severity::Error);
        CHECK(d->related.size() == 1);
    }
}

TEST_CASE("LLM003 cross-process ignores disjoint part-selects") {
    auto diags = lint_only(
        "module m(input a, output [1:0] y);\nassign y[0] = a;\nassign y[1] = ~a;\nendmodule\n");
    CHECK(with_code(diags, "LLM003").empty());
}

TEST_CASE("LLM003 sees instance outputs as drivers") {
    auto diags = lint_only(
        "module c(input a, output y); assign y = a; endmodule\n"
        "module m(input a, output y);\nc u (.a(a), .y(y));\nassign y = 1'b0;\nendmodule\n");
    CHECK(with_code(diags, "LLM003").size() == 1);
}

TEST_CASE("property: LLM003 cross-process findings recount from the tree") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::string src = "module m(input clk, input a, output reg [3:0] r, output [3:0] w);\n";
        int procs = 1 + int(rng() % 4);
        for (int p = 0; p < procs; ++p) {
            std::string sig = rng() % 2 ? "r" : "w";
            uint32_t lo = rng() % 4, hi = lo + rng() % (4 - lo);
            std::string lv = sig + "[" + std::to_string(hi) + ":" + std::to_string(lo) + "]";
            if (sig == "w") src += "assign " + lv + " = a;\n";
            else src += "always @(posedge clk) " + lv + " <= a;\n";
        }
        src += "endmodule\n";
        auto r = frontend::parse_source(src);
        auto dm = build_drive_map(r.ast);
        auto diags = with_code(veriloop::lint::lint(r.ast, dm, {}), "LLM003");
        // Independent recount: pairs of distinct processes with overlapping ranges per signal.
        size_t expected = 0;
        for (const auto& [sig, sites] : dm.find("m")->signals) {
            bool conflict = false;
            for (size_t i = 0; i < sites.size(); ++i)
                for (size_t j = i + 1; j < sites.size(); ++j)
                    conflict |= sites[i].process != sites[j].process && sites[i].bits->lo <= sites[j].bits->hi &&
                                sites[j].bits->lo <= sites[i].bits->hi;
            expected += conflict;
        }
        CAPTURE(src);
        CHECK(diags.size() == expected);
    }
}

TEST_CASE("LLM004 on the statement after the reset if/else") {
    auto l = run_file("corpus/listings/listing4_ambiguous_clock.v");
    auto hits = with_code(l.analysis.diagnostics, "LLM004");
    REQUIRE(hits.size() == 1);
    CHECK(hits[0]->span.line == 13);
    CHECK_FALSE(hits[0]->hint.empty());
}

TEST_CASE("LLM004 recognizes the guard structurally") {
    auto clean = lint_only(
        "module m(input ck, input rst, input d, output reg q);\nalways @(posedge ck or posedge rst)\n"
        "  if (rst == 1'b1) q <= 0; else q <= d;\nendmodule\n");
    CHECK(with_code(clean, "LLM004").empty());
    auto no_guard = lint_only(
        "module m(input ck, input rst, input d, output reg q);\nalways @(posedge ck or posedge rst)\n"
        "  q <= d;\nendmodule\n");
    REQUIRE(with_code(no_guard, "LLM004").size() == 1);
    CHECK(with_code(no_guard, "LLM004")[0]->span.line == 3);
    auto wrong_signal = lint_only(
        "module m(input ck, input rst, input d, output reg q);\nalways @(posedge ck or posedge rst)\n"
        "  if (d) q <= 0; else q <= d;\nendmodule\n");
    CHECK(with_code(wrong_signal, "LLM004").size() == 1);
}

TEST_CASE("LLM005 latch inference") {
    auto diags = lint_only(
        "module m(input s, input a, output reg y, output reg z);\nalways @(*) begin\n  z = 0;\n  if (s) y = a;\n"
        "  if (s) z = 1;\nend\nendmodule\n");
    auto hits = with_code(diags, "LLM005");
    REQUIRE(hits.size() == 1);
    CHECK(hits[0]->message.find("'y'") != std::string::npos);
    CHECK(hits[0]->severity == Severity::Warning);
}

TEST_CASE("LLM005 treats exhaustive cases as complete") {
    auto diags = lint_only(
        "module m(input [1:0] s, output reg y);\nalways @(*) case (s) 2'd0: y = 0; 2'd1: y = 1; 2'd2: y = 0; "
        "2'd3: y = 1; endcase\nendmodule\n");
    CHECK(with_code(diags, "LLM005").empty());
    CHECK(with_code(diags, "LLM006").empty());
}

TEST_CASE("LLM006 missing default on a non-exhaustive case") {
    auto diags = lint_only(
        "module m(input [1:0] s, output reg y);\nalways @(*) begin y = 0; case (s) 2'd0: y = 1; endcase end\n"
        "endmodule\n");
    CHECK(with_code(diags, "LLM006").size() == 1);
    CHECK(with_code(diags, "LLM005").empty());
    auto casez = lint_only(
        "module m(input [1:0] s, output reg y);\nalways @(*) casez (s) 2'b1?: y = 1; 2'b0?: y = 0; endcase\n"
        "endmodule\n");
    CHECK(with_code(casez, "LLM006").empty());
}

TEST_CASE("LLM007 initial blocks and delays") {
    auto diags = lint_only(
        "module m(input clk, output reg q);\ninitial q = 0;\nalways @(posedge clk) q <= #1 ~q;\nendmodule\n");
    CHECK(with_code(diags, "LLM007").size() == 2);
}

TEST_CASE("reference PWM corpus has no error-severity findings") {
    SourceManager sm;
    for (const auto& f : testutil::pwm_corpus_files()) sm.load(f);
    LintConfig cfg;
    cfg.intra_process_multi_drive = true;
    auto a = analyze(sm, {}, cfg);
    CHECK_FALSE(has_errors(a.diagnostics));
    CHECK(a.diagnostics.empty());
}

TEST_CASE("config: disabling a rule removes exactly its diagnostics") {
    const std::string src =
        "module m(input clk, input rst, input [1:0] s, input a, output reg y, output reg q);\n"
        "initial q = 0;\nalways @(*) case (s) 2'd0: y = a; endcase\n"
        "always @(posedge clk or negedge rst) begin if (!rst) q <= 0; else q <= a; q <= 1; end\n"
        "always @(posedge clk) q <= #2 a;\nendmodule\n";
    LintConfig base;
    base.intra_process_multi_drive = true;
    auto all = lint_only(src, base);
    for (const auto& rule : rules()) {
        LintConfig cfg = base;
        REQUIRE(cfg.set(rule.code, "off"));
        auto fewer = lint_only(src, cfg);
        std::vector<std::string> expect, got;
        for (const auto& d : all)
            if (d.code != rule.code) expect.push_back(d.code + d.message + std::to_string(d.span.start));
        for (const auto& d : fewer) got.push_back(d.code + d.message + std::to_string(d.span.start));
        CAPTURE(rule.code);
        CHECK(expect == got);
    }
}

TEST_CASE("config: severity overrides, deny-warnings, unknown codes") {
    const std::string src = "module m(input clk, output reg q);\ninitial q = 0;\nendmodule\n";
    LintConfig cfg;
    CHECK(cfg.set("LLM007", "error"));
    CHECK(lint_only(src, cfg).at(0).severity == Severity::Error);
    CHECK_FALSE(cfg.set("LLM007", "loud"));
    CHECK(cfg.set("LLM099", "off"));
    CHECK(cfg.unknown_codes() == std::vector<std::string>{"LLM099"});

    LintConfig deny;
    deny.deny_warnings = true;
    auto l = run(src, deny);
    REQUIRE(l.analysis.diagnostics.size() == 1);
    CHECK(l.analysis.diagnostics[0].severity == Severity::Error);
}

TEST_CASE("diagnostics are ordered by file, offset, code and stable under file order") {
    const std::string a = "module a(input clk, output reg q);\ninitial q = 0;\nalways @(posedge clk) q <= #1 1;\nendmodule\n";
    const std::string b = "module b(input clk, output reg q);\nalways @(*) begin\n}\nendmodule\n";
    SourceManager s1, s2;
    s1.add("a.v", a);
    s1.add("b.v", b);
    s2.add("b.v", b);
    s2.add("a.v", a);
    auto d1 = analyze(s1, {}, {}).diagnostics;
    auto d2 = analyze(s2, {}, {}).diagnostics;
    for (size_t i = 1; i < d1.size(); ++i) {
        const auto& p = d1[i - 1];
        const auto& q = d1[i];
        CHECK(std::tie(p.span.file, p.span.start, p.code) <= std::tie(q.span.file, q.span.start, q.code));
    }
    auto per_file = [](const std::vector<Diagnostic>& ds, const SourceManager& sm, const std::string& name) {
        std::vector<std::string> out;
        for (const auto& d : ds)
            if (sm.name(d.span.file) == name) out.push_back(d.code + ":" + std::to_string(d.span.start));
        return out;
    };
    CHECK(per_file(d1, s1, "a.v") == per_file(d2, s2, "a.v"));
    CHECK(per_file(d1, s1, "b.v") == per_file(d2, s2, "b.v"));
}

TEST_CASE("render: text and json") {
    SourceManager sm;
    CHECK(render_diagnostics({}, Format::Text, sm).empty());

    auto l1 = run_file("corpus/listings/listing1_begin_end.v");
    std::string text = render_diagnostics(l1.analysis.diagnostics, Format::Text, l1.sources);
    CHECK(std::count(text.begin(), text.end(), '\n') == 1);
    CHECK(text.find("listing1_begin_end.v:7:1: error[LLM001] ") != std::string::npos);

    auto l4 = run_file("corpus/listings/listing4_ambiguous_clock.v");
    auto j = nlohmann::json::parse(render_diagnostics(l4.analysis.diagnostics, Format::Json, l4.sources));
    REQUIRE(j.is_array());
    REQUIRE(j.size() == 1);
    CHECK(j[0]["rule"] == "LLM004");
    CHECK(j[0]["severity"] == "error");
    CHECK(j[0]["start"]["line"] == 13);
    CHECK_FALSE(j[0]["hint"].get<std::string>().empty());
    for (const char* key : {"rule", "severity", "file", "start", "end", "message", "hint", "related"})
        CHECK(j[0].contains(key));
}
