// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <random>
#include <sstream>

#include "doctest.h"
#include "support/test_util.hpp"
#include "veriloop/frontend/parser.hpp"
#include "veriloop/sim/sim.hpp"
#include "veriloop/sim/vcd.hpp"

using namespace veriloop;
using namespace veriloop::sim;
using veriloop::frontend::ParseResult;

namespace {

struct Design {
    std::vector<ParseResult> files;
    std::vector<const frontend::Ast*> asts() const {
        std::vector<const frontend::Ast*> out;
        for (const auto& f : files) out.push_back(&f.ast);
        return out;
    }
};

Design parse_text(const std::string& text) {
    Design d;
    d.files.push_back(frontend::parse_source(text, 0));
    REQUIRE_MESSAGE(d.files[0].ok(), text);
    return d;
}

Design parse_corpus() {
    Design d;
    uint32_t id = 0;
    for (const auto& p : testutil::pwm_corpus_files()) {
        d.files.push_back(frontend::parse_source(testutil::read_file(p), id++));
        REQUIRE(d.files.back().ok());
    }
    return d;
}

std::string elab_error(const std::string& text, const std::string& top) {
    Design d = parse_text(text);
    try {
        elaborate(d.asts(), top);
    } catch (const SimError& e) {
        return e.what();
    }
    return {};
}

Stimulus sweep_stimulus() {
    Stimulus s;
    s.reset_cycles = 4;
    s.writes.push_back({"en", 0, 1});
    const uint64_t duties[] = {0, 64, 128, 192};
    for (size_t k = 0; k < 4; ++k) s.writes.push_back({"duty", k * 512, duties[k]});
    return s;
}

const std::vector<std::string> kFixtureSignals = {"pwm", "pwm_n", "u_cnt1.count", "u_cnt2.count", "u_cnt3.count"};

std::vector<std::vector<uint64_t>> read_fixture() {
    std::vector<std::vector<uint64_t>> rows;
    std::istringstream in(testutil::read_file(testutil::repo_path("tests/fixtures/pwm_sweep_cxxrtl.csv")));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<uint64_t> row;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stoull(cell));
        rows.push_back(row);
    }
    return rows;
}

constexpr const char* kToggler = R"(
module toggler(input wire clk, input wire rstn, output reg q);
    always @(posedge clk or negedge rstn)
        if (!rstn) q <= 1'b0;
        else q <= ~q;
endmodule
)";

}  // namespace

TEST_CASE("elaborate: single assign gives one combinational process") {
    Design d = parse_text("module m(input a, output y); assign y = a; endmodule\n");
    ElaboratedDesign e = elaborate(d.asts(), "m");
    CHECK(e.comb_processes.size() == 1);
    CHECK(e.edge_processes.empty());
    REQUIRE(e.find("y"));
    CHECK(e.find("a")->kind == SignalKind::Input);
    CHECK(e.ports == std::vector<std::string>{"a", "y"});
}

TEST_CASE("elaborate: combinational cycle names its signals") {
    std::string msg = elab_error("module m(output a, output b); assign a = b; assign b = a; endmodule\n", "m");
    CHECK(msg.find("combinational cycle") != std::string::npos);
    CHECK(msg.find("a, b") != std::string::npos);

    msg = elab_error("module m(output a); assign a = ~a; endmodule\n", "m");
    CHECK(msg.find("combinational cycle through a") != std::string::npos);

    // Disjoint bits of one vector are not a cycle.
    Design d = parse_text(
        "module m(input x, output [1:0] s); assign s[0] = x; assign s[1] = s[0]; endmodule\n");
    CHECK_NOTHROW(elaborate(d.asts(), "m"));
}

TEST_CASE("elaborate: errors for unresolved, multi-clock and missing top") {
    CHECK(elab_error("module m(input a); ghost u(.x(a)); endmodule\n", "m").find("ghost") != std::string::npos);
    CHECK(elab_error("module m(input a); endmodule\n", "zz").find("'zz'") != std::string::npos);
    std::string two = elab_error(R"(
module m(input clk, input clk2, input d, output reg q, output reg r);
    always @(posedge clk) q <= d;
    always @(posedge clk2) r <= d;
endmodule
)",
                                 "m");
    CHECK(two.find("multiple clock domains") != std::string::npos);
    std::string derived = elab_error(R"(
module m(input clk, input d, output reg q);
    wire g = ~clk;
    always @(posedge g) q <= d;
endmodule
)",
                                     "m");
    CHECK(derived.find("derived inside the design") != std::string::npos);
}

TEST_CASE("elaborate: PWM corpus structure") {
    Design d = parse_corpus();
    ElaboratedDesign e = elaborate(d.asts(), "pwm_top");
    std::map<std::string, int> edges, combs;
    for (const auto& p : e.edge_processes) ++edges[p.module];
    for (const auto& p : e.comb_processes) ++combs[p.module];
    CHECK(edges["up_counter"] == 3);
    CHECK(edges["phase_ctrl"] == 2);
    CHECK(edges["dff"] == 3);
    CHECK(edges["dead_time"] == 3);
    CHECK(e.edge_processes.size() == 11);
    CHECK(combs["pwm_cmp"] == 3);
    for (const auto& p : e.edge_processes) {
        CHECK(p.clock == "clk");
        REQUIRE(p.reset);
        CHECK(*p.reset == "rstn");
    }
    REQUIRE(e.find("u_cnt1.count"));
    CHECK(e.find("u_cnt1.count")->width == 8);
    CHECK(e.find("u_cnt1.count")->kind == SignalKind::State);
    // Port-connected names share storage.
    CHECK(e.find("u_cnt1.count")->slot == e.find("count1")->slot);
    CHECK(e.find("u_dt1.shift")->width == 4);
    CHECK(e.warnings.empty());
}

TEST_CASE("run: toggler after reset release") {
    Design d = parse_text(kToggler);
    ElaboratedDesign e = elaborate(d.asts(), "toggler");
    Stimulus s;
    s.reset_cycles = 1;
    Trace t = run(e, s, 5, {"q"});
    CHECK(t.cycles == 5);
    CHECK(t.signals[0].values == std::vector<uint64_t>{0, 1, 0, 1, 0});
}

TEST_CASE("run: stimulus preconditions") {
    Design d = parse_corpus();
    ElaboratedDesign e = elaborate(d.asts(), "pwm_top");
    Stimulus s;
    s.writes.push_back({"nope", 0, 1});
    CHECK_THROWS_AS(run(e, s, 4), SimError);
    s.writes = {{"duty", 0, 256}};
    CHECK_THROWS_WITH_AS(run(e, s, 4), doctest::Contains("does not fit"), SimError);
    s.writes = {{"thresh", 0, 1}};
    CHECK_THROWS_AS(run(e, s, 4), SimError);
    s.writes = {{"rstn", 0, 1}};
    CHECK_THROWS_AS(run(e, s, 4), SimError);
    s.writes = {};
    s.reset_cycles = 0;
    CHECK_THROWS_AS(run(e, s, 4), SimError);
    CHECK_THROWS_AS(run(e, Stimulus{}, 0), SimError);
    CHECK_THROWS_AS(run(e, Stimulus{}, 4, {"ghost"}), SimError);
}

TEST_CASE("run: stimulus JSON") {
    Stimulus s = load_stimulus(R"({"reset_cycles": 4, "writes": [{"signal":"duty","cycle":0,"value":64}]})");
    CHECK(s.reset_cycles == 4);
    REQUIRE(s.writes.size() == 1);
    CHECK(s.writes[0].signal == "duty");
    CHECK(s.writes[0].value == 64);
    CHECK(load_stimulus("{}").reset_cycles == 4);
    CHECK_THROWS_AS(load_stimulus("{\"writes\": [{\"signal\": 3}]}"), SimError);
    CHECK_THROWS_AS(load_stimulus("[1"), SimError);
}

TEST_CASE("run: PWM corpus matches the independent CXXRTL trace") {
    Design d = parse_corpus();
    ElaboratedDesign e = elaborate(d.asts(), "pwm_top");
    Trace t = run(e, sweep_stimulus(), 2048, kFixtureSignals);
    auto rows = read_fixture();
    REQUIRE(rows.size() == 2048);
    size_t mismatches = 0;
    for (size_t c = 0; c < 2048; ++c) {
        REQUIRE(rows[c].size() == 6);
        CHECK(rows[c][0] == c);
        for (size_t k = 0; k < 5; ++k)
            if (t.signals[k].values[c] != rows[c][k + 1]) {
                if (++mismatches < 5) MESSAGE("cycle " << c << " " << kFixtureSignals[k]);
            }
    }
    CHECK(mismatches == 0);
}

TEST_CASE("run: determinism, two-state closure and reset dominance") {
    Design d = parse_corpus();
    ElaboratedDesign e = elaborate(d.asts(), "pwm_top");
    std::mt19937 rng(99);
    for (int trial = 0; trial < 8; ++trial) {
        Stimulus s;
        s.reset_cycles = 1 + rng() % 12;
        s.writes.push_back({"en", 0, 1});
        for (int k = 0; k < 6; ++k) s.writes.push_back({"duty", rng() % 400, rng() % 256});
        if (trial % 2) s.writes.push_back({"en", rng() % 400, 0});
        Trace a = run(e, s, 400);
        Trace b = run(e, s, 400);
        CHECK(a == b);
        for (const auto& sig : a.signals) {
            for (uint64_t v : sig.values) CHECK(v <= width_mask(sig.width));
            const SignalInfo* info = e.find(sig.name);
            if (info->kind != SignalKind::State) continue;
            for (size_t c = 0; c < s.reset_cycles; ++c) CHECK(sig.values[c] == 0);
        }
    }
}

TEST_CASE("run: edge-process order never changes the trace") {
    // Random register networks; every register is updated by its own process
    // from other registers, then the processes are reversed and shuffled.
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        int regs = 2 + static_cast<int>(rng() % 5);
        std::vector<std::string> procs;
        const char* ops[] = {"+", "^", "&", "|", "-"};
        for (int r = 0; r < regs; ++r) {
            int a = static_cast<int>(rng() % regs), b = static_cast<int>(rng() % regs);
            std::ostringstream p;
            p << "    always @(posedge clk or negedge rstn)\n"
              << "        if (!rstn) r" << r << " <= 8'd" << (rng() % 256) << ";\n"
              << "        else r" << r << " <= r" << a << " " << ops[rng() % 5] << " r" << b << " + in;\n";
            procs.push_back(p.str());
        }
        auto build = [&](const std::vector<std::string>& order) {
            std::ostringstream m;
            m << "module g(input clk, input rstn, input [7:0] in";
            for (int r = 0; r < regs; ++r) m << ", output reg [7:0] r" << r;
            m << ");\n";
            for (const auto& p : order) m << p;
            m << "endmodule\n";
            return m.str();
        };
        Stimulus s;
        s.reset_cycles = 2;
        s.writes.push_back({"in", 0, rng() % 256});
        s.writes.push_back({"in", 7, rng() % 256});
        Design d1 = parse_text(build(procs));
        Trace t1 = run(elaborate(d1.asts(), "g"), s, 30);
        auto shuffled = procs;
        std::reverse(shuffled.begin(), shuffled.end());
        Design d2 = parse_text(build(shuffled));
        CHECK(run(elaborate(d2.asts(), "g"), s, 30) == t1);
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        Design d3 = parse_text(build(shuffled));
        CHECK(run(elaborate(d3.asts(), "g"), s, 30) == t1);
    }
}

TEST_CASE("run: swap rule is also a register swap") {
    Design d = parse_text(R"(
module sw(input clk, input rstn, output reg [3:0] a, output reg [3:0] b);
    always @(posedge clk or negedge rstn)
        if (!rstn) a <= 4'd1; else a <= b;
    always @(posedge clk or negedge rstn)
        if (!rstn) b <= 4'd2; else b <= a;
endmodule
)");
    Trace t = run(elaborate(d.asts(), "sw"), Stimulus{1, {}}, 4, {"a", "b"});
    CHECK(t.signals[0].values == std::vector<uint64_t>{1, 2, 1, 2});
    CHECK(t.signals[1].values == std::vector<uint64_t>{2, 1, 2, 1});
}

TEST_CASE("run: expression sizing") {
    Design d = parse_text(R"(
module w(input [7:0] a, input [7:0] b, input s, output [8:0] sum, output [7:0] wrap,
         output [7:0] inv, output gt, output [3:0] cz, output [7:0] cat, output [7:0] sh);
    assign sum = a + b;
    assign wrap = a + b;
    assign inv = ~s;
    assign gt = (a + b) > 9'd255;
    reg [3:0] r;
    always @* begin
        casez (a[3:0])
            4'b1???: r = 4'd8;
            4'b01??: r = 4'd4;
            default: r = 4'd0;
        endcase
    end
    assign cz = r;
    assign cat = {a[3:0], {2{s, 1'b0}}};
    assign sh = a >> 2;
endmodule
)");
    ElaboratedDesign e = elaborate(d.asts(), "w");
    Stimulus st{1, {{"a", 0, 200}, {"b", 0, 100}, {"s", 0, 1}}};
    Trace t = run(e, st, 1);
    CHECK(t.find("sum")->values[0] == 300);
    CHECK(t.find("wrap")->values[0] == 44);
    CHECK(t.find("inv")->values[0] == 0xFE);
    CHECK(t.find("gt")->values[0] == 1);
    CHECK(t.find("cz")->values[0] == 8);  // 200 = 0b1100_1000, low nibble 1000
    CHECK(t.find("cat")->values[0] == ((8u << 4) | 0b1010));
    CHECK(t.find("sh")->values[0] == 50);
}

TEST_CASE("run: combinational instability") {
    Design d = parse_text("module o(output reg x); always @* x = ~x; endmodule\n");
    ElaboratedDesign e = elaborate(d.asts(), "o");
    CHECK_THROWS_WITH_AS(run(e, Stimulus{}, 2), "combinational instability", SimError);
}

TEST_CASE("elaborate: x/z literals warn once and read as 0") {
    Design d = parse_text("module x(output [3:0] y, output [3:0] z); assign y = 4'b1x1x; assign z = 4'bzz11; endmodule\n");
    ElaboratedDesign e = elaborate(d.asts(), "x");
    CHECK(e.warnings.size() == 1);
    CHECK(e.warnings[0].code == "SIM002");
    Trace t = run(e, Stimulus{}, 1);
    CHECK(t.find("y")->values[0] == 0b1010);
    CHECK(t.find("z")->values[0] == 0b0011);
}

TEST_CASE("vcd: constant signal has one value entry") {
    Trace t;
    t.cycles = 10;
    t.signals.push_back({"k", 4, std::vector<uint64_t>(10, 5)});
    std::string v = write_vcd(t, "top");
    CHECK(v.find("$timescale 1ns $end") != std::string::npos);
    CHECK(v.find("$dumpvars") != std::string::npos);
    size_t entries = 0;
    std::istringstream in(v);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line[0] == 'b') ++entries;
    CHECK(entries == 1);
    CHECK(read_vcd(v) == t);
}

TEST_CASE("vcd: toggler changes at consecutive timestamps") {
    Design d = parse_text(kToggler);
    Trace t = run(elaborate(d.asts(), "toggler"), Stimulus{1, {}}, 5, {"q"});
    std::string v = write_vcd(t, "toggler");
    CHECK(v.find("#1\n1!\n#2\n0!\n#3\n1!\n#4\n0!\n#5\n") != std::string::npos);
    CHECK(read_vcd(v) == t);
}

TEST_CASE("vcd: PWM trace round trips with hierarchy scopes") {
    Design d = parse_corpus();
    ElaboratedDesign e = elaborate(d.asts(), "pwm_top");
    Trace t = run(e, sweep_stimulus(), 2048);
    std::string v = write_vcd(t, "pwm_top");
    CHECK(v.find("$scope module u_cnt1 $end") != std::string::npos);
    CHECK(read_vcd(v) == t);
}

TEST_CASE("vcd: random traces round trip") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        Trace t;
        t.cycles = 1 + rng() % 50;
        int n = 1 + static_cast<int>(rng() % 6);
        for (int k = 0; k < n; ++k) {
            TraceSignal s;
            s.width = 1 + static_cast<uint32_t>(rng() % 64);
            int depth = static_cast<int>(rng() % 3);
            for (int i = 0; i < depth; ++i) s.name += "u" + std::to_string(rng() % 3) + ".";
            s.name += "s" + std::to_string(k);
            bool sticky = rng() % 2;
            uint64_t v = rng() & width_mask(s.width);
            for (size_t c = 0; c < t.cycles; ++c) {
                if (!sticky || rng() % 5 == 0) v = rng() & width_mask(s.width);
                s.values.push_back(v);
            }
            t.signals.push_back(s);
        }
        CHECK(read_vcd(write_vcd(t, "top")) == t);
    }
}

TEST_CASE("trace: CSV layout") {
    Trace t;
    t.cycles = 2;
    t.signals.push_back({"a", 1, {0, 1}});
    t.signals.push_back({"b", 8, {7, 200}});
    CHECK(trace_to_csv(t) == "cycle,a,b\n0,0,7\n1,1,200\n");
}
