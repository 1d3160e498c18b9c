// SPDX-License-Identifier: Apache-2.0
#include <chrono>
#include <random>

#include "doctest.h"
#include "support/test_util.hpp"
#include "veriloop/orchestrator/backend.hpp"
#include "veriloop/orchestrator/extract.hpp"
#include "veriloop/orchestrator/prompt.hpp"
#include "veriloop/orchestrator/session.hpp"

using namespace veriloop;
using namespace veriloop::orchestrator;
namespace fs = std::filesystem;

namespace {

const hierarchy::DesignManifest& manifest() {
    static hierarchy::DesignManifest m =
        hierarchy::load_manifest_file(testutil::repo_path("corpus/pwm/pwm_manifest.json"));
    return m;
}

SessionConfig session(const std::string& name, const fs::path& out) {
    SessionConfig c = load_session_config(testutil::repo_path("corpus/sessions/" + name));
    c.out_dir = out;
    return c;
}

size_t count_lines_starting(const std::string& text, const std::string& prefix) {
    size_t n = 0, pos = 0;
    while (pos < text.size()) {
        size_t nl = text.find('\n', pos);
        if (text.compare(pos, prefix.size(), prefix) == 0) ++n;
        if (nl == std::string::npos) break;
        pos = nl + 1;
    }
    return n;
}

class CountingBackend : public Backend {
public:
    explicit CountingBackend(Backend& inner) : inner_(inner) {}
    BackendReply generate(const BackendRequest& r) override {
        ++calls[r.module];
        return inner_.generate(r);
    }
    std::map<std::string, int> calls;

private:
    Backend& inner_;
};

}  // namespace

TEST_CASE("prompt: sections in order with the exact interface") {
    RolePrompt p = build_prompt(manifest(), "up_counter", RoleConfig::defaults());
    std::string text = p.render();
    CHECK(text.find("specialist in digital integrated circuit (IC) design") != std::string::npos);
    size_t role = text.find("## Role"), style = text.find("## Coding style"), itf = text.find("## Interface"),
           clk = text.find("## Clock and reset"), task = text.find("## Task");
    CHECK(role < style);
    CHECK(style < itf);
    CHECK(itf < clk);
    CHECK(clk < task);
    CHECK(text.find("## Feedback") == std::string::npos);
    CHECK(count_lines_starting(p.interface, "  - ") == 4);
    CHECK(p.interface.find("  - input clk, 1 bit\n") != std::string::npos);
    CHECK(p.interface.find("  - output count, 8 bits [7:0]\n") != std::string::npos);
    CHECK(p.clock_reset.find("`rstn`, active low, asynchronous") != std::string::npos);
    CHECK(p.style.size() == RoleConfig::defaults().style.size());
}

TEST_CASE("prompt: interface block mirrors every manifest module") {
    for (const auto& m : manifest().modules) {
        RolePrompt p = build_prompt(manifest(), m.name, RoleConfig::defaults());
        REQUIRE(count_lines_starting(p.interface, "  - ") == m.ports.size());
        size_t at = 0;
        for (const auto& port : m.ports) {
            std::string needle = "  - " + std::string(frontend::direction_name(port.dir)) + " " + port.name + ", " +
                                 std::to_string(port.width);
            size_t next = p.interface.find(needle, at);
            INFO(m.name << " port " << port.name);
            REQUIRE(next != std::string::npos);
            at = next + 1;
        }
        for (const auto& c : m.children)
            CHECK(p.task.find("  - " + c.module + " " + c.instance + "\n") != std::string::npos);
    }
}

TEST_CASE("prompt: feedback, combinational modules and errors") {
    FeedbackItem f{"LLM001", "error", "up_counter.v:15:5", "block opened with 'begin' is closed with '}'", "use end"};
    std::string text = build_prompt(manifest(), "up_counter", RoleConfig::defaults(), {f}).render();
    CHECK(text.find("## Feedback") != std::string::npos);
    CHECK(text.find("LLM001") != std::string::npos);
    CHECK(text.find("up_counter.v:15:5") != std::string::npos);
    CHECK(text.find("regenerate the complete module") != std::string::npos);
    CHECK(text.find(render_feedback_item(f)) > text.find("## Feedback"));

    CHECK(build_prompt(manifest(), "pwm_cmp", RoleConfig::defaults()).clock_reset.find("purely combinational") !=
          std::string::npos);

    RoleConfig empty = RoleConfig::defaults();
    empty.preamble = "  \n";
    CHECK_THROWS_AS(build_prompt(manifest(), "up_counter", empty), ConfigError);
    CHECK_THROWS_AS(build_prompt(manifest(), "no_such", RoleConfig::defaults()), ConfigError);
}

TEST_CASE("extract: fences, fallback and failures") {
    Extraction one = extract_code("Sure.\n```verilog\nmodule a(input x);\nendmodule\n```\nDone.");
    REQUIRE(one.units.size() == 1);
    CHECK(one.units[0] == "module a(input x);\nendmodule\n");

    CHECK_FALSE(extract_code("A counter increments every cycle. No code here.").ok());
    CHECK_FALSE(extract_code("The module will count up.").ok());

    Extraction two = extract_code(
        "```verilog\nmodule dut(input a);\nendmodule\n```\ntestbench:\n```Verilog\nmodule tb;\nendmodule\n```\n");
    REQUIRE(two.units.size() == 2);
    CHECK(declared_modules(two.units[0]) == std::vector<std::string>{"dut"});
    CHECK(declared_modules(two.units[1]) == std::vector<std::string>{"tb"});

    Extraction unlabeled = extract_code("```\nmodule u #(parameter W = 1) ();\nendmodule\n```\n```python\nprint(1)\n```");
    REQUIRE(unlabeled.units.size() == 1);
    CHECK(declared_modules(unlabeled.units[0]) == std::vector<std::string>{"u"});

    CHECK_FALSE(extract_code("```python\nmodule = 3\n```").ok());

    Extraction raw = extract_code("Here is the module you asked for:\nmodule p(input a);\nendmodule\ntext\n"
                                  "// module fake(\nmodule q;\nendmodule");
    REQUIRE(raw.units.size() == 2);
    CHECK(raw.units[0] == "module p(input a);\nendmodule\n");
    CHECK(raw.units[1] == "module q;\nendmodule\n");

    Extraction open = extract_code("```verilog\nmodule r(input a);\n  assign b = a;\n");
    REQUIRE(open.units.size() == 1);
    CHECK(open.units[0].find("assign b = a;") != std::string::npos);
}

TEST_CASE("extract: random noise never throws") {
    std::mt19937 rng(5);
    const std::string pieces[] = {"module", "endmodule", "```", "```verilog", "\n", " ", "(", ";", "x", "//", "/*",
                                  "*/", "\""};
    for (int i = 0; i < 2000; ++i) {
        std::string s;
        int n = rng() % 30;
        for (int k = 0; k < n; ++k) s += pieces[rng() % std::size(pieces)];
        Extraction ex = extract_code(s);
        for (const auto& u : ex.units) CHECK(!u.empty());
    }
}

TEST_CASE("session: scripted fix converges on the second attempt") {
    testutil::TempDir tmp("orch");
    SessionConfig cfg = session("converge.json", tmp.path());
    SessionLog log = run_session(cfg);
    CHECK(log.verdict == SessionVerdict::Converged);
    REQUIRE(log.targets.size() == 1);
    const auto& attempts = log.targets[0].attempts;
    REQUIRE(attempts.size() == 2);
    CHECK(attempts[0].verdict == AttemptVerdict::Dirty);
    CHECK(attempts[1].verdict == AttemptVerdict::Clean);

    bool has_llm001 = false;
    for (const auto& f : attempts[0].feedback) {
        has_llm001 = has_llm001 || f.code == "LLM001";
        if (f.severity == "error") {
            CHECK(attempts[1].prompt.find(render_feedback_item(f)) != std::string::npos);
            CHECK(attempts[1].prompt.find(f.location) != std::string::npos);
        }
    }
    CHECK(has_llm001);
    CHECK(attempts[0].prompt.find("## Feedback") == std::string::npos);

    for (const char* f : {"prompt-1.txt", "response-1.txt", "diags-1.json", "prompt-2.txt", "src-2/up_counter.v"})
        CHECK(fs::exists(tmp / ("up_counter/" + std::string(f))));
    CHECK(fs::exists(tmp / "session.json"));
    auto saved = nlohmann::json::parse(testutil::read_file(tmp / "session.json"));
    CHECK(saved["verdict"] == "converged");
    auto diags = nlohmann::json::parse(testutil::read_file(tmp / "up_counter/diags-1.json"));
    REQUIRE(diags.is_array());
    CHECK(diags[0]["file"] == "up_counter.v");
    CHECK(testutil::read_file(tmp / "up_counter/prompt-2.txt") == attempts[1].prompt);
}

TEST_CASE("session: reproducible apart from wall-clock") {
    testutil::TempDir a("orch"), b("orch");
    auto first = run_session(session("converge.json", a.path())).to_json(false);
    auto second = run_session(session("converge.json", b.path())).to_json(false);
    CHECK(first == second);
    CHECK(first.dump().find("wall_ms") == std::string::npos);
}

TEST_CASE("session: always-broken output exhausts the budget") {
    testutil::TempDir tmp("orch");
    SessionConfig cfg = session("always_broken.json", tmp.path());
    auto backend = make_backend(cfg.backend);
    CountingBackend counting(*backend);
    SessionLog log = run_session(cfg, counting);
    CHECK(log.verdict == SessionVerdict::BudgetExhausted);
    REQUIRE(log.targets[0].attempts.size() == 3);
    CHECK(counting.calls["up_counter"] == 3);
    const auto& at = log.targets[0].attempts;
    CHECK(at[0].verdict == AttemptVerdict::Dirty);
    CHECK(at[1].verdict == AttemptVerdict::ExtractionFailed);
    CHECK(at[2].verdict == AttemptVerdict::Dirty);
    CHECK(at[2].prompt.find("EXT001") != std::string::npos);
    CHECK(at[2].prompt.find("<response>") != std::string::npos);
    CHECK(at[1].prompt.find("LLM001") != std::string::npos);
}

TEST_CASE("session: reference modules pass every check including the golden comparison") {
    testutil::TempDir tmp("orch");
    SessionConfig cfg = session("reference_golden.json", tmp.path());
    REQUIRE(cfg.golden);
    SessionLog log = run_session(cfg);
    CHECK(log.verdict == SessionVerdict::Converged);
    REQUIRE(log.targets.size() == 7);
    CHECK(log.targets.back().module == "pwm_top");
    for (const auto& t : log.targets) {
        INFO(t.module);
        CHECK(t.attempts.size() == 1);
        for (const auto& d : t.attempts[0].diagnostics) CHECK(d.code.rfind("SIM", 0) != 0);
    }
}

TEST_CASE("session: golden mismatches come back as SIM001 feedback") {
    testutil::TempDir tmp("orch");
    auto files = testutil::write_dead_time_mutant(tmp / "mutant");
    SessionConfig cfg = session("reference_golden.json", tmp / "out");
    cfg.golden->duties = {64};
    cfg.max_iterations = 2;
    cfg.backend.script.clear();
    for (const char* name : {"duty_sub.v", "up_counter.v", "phase_ctrl.v", "pwm_cmp.v", "dff.v", "dead_time.v",
                             "pwm_top.v", "pwm_top.v"})
        cfg.backend.script.push_back(testutil::read_file(tmp / ("mutant/" + std::string(name))));
    SessionLog log = run_session(cfg);
    CHECK(log.verdict == SessionVerdict::BudgetExhausted);
    const auto& top = log.targets.back();
    CHECK(top.module == "pwm_top");
    REQUIRE(top.attempts.size() == 2);
    size_t sim = 0;
    for (const auto& f : top.attempts[0].feedback)
        if (f.code == "SIM001") {
            ++sim;
            CHECK(f.location == "<simulation>");
            CHECK(top.attempts[1].prompt.find(render_feedback_item(f)) != std::string::npos);
        }
    CHECK(sim >= 1);
}

TEST_CASE("session: garbage responses cannot break the loop") {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        SessionConfig cfg;
        cfg.manifest = manifest();
        cfg.targets = {"dff"};
        cfg.max_iterations = 3;
        for (int k = 0; k < 3; ++k) {
            std::string junk;
            size_t n = rng() % 400;
            for (size_t i = 0; i < n; ++i) junk.push_back(static_cast<char>(rng() % 256));
            if (k == 1) junk = "```verilog\nmodule dff(" + junk + "\n```";
            cfg.backend.script.push_back(junk);
        }
        SessionLog log;
        CHECK_NOTHROW(log = run_session(cfg));
        CHECK(log.targets[0].attempts.size() <= 3);
        CHECK(log.verdict != SessionVerdict::BackendFailure);
    }
}

TEST_CASE("session: targets stop at the first failure and the mock is shared") {
    SessionConfig cfg;
    cfg.manifest = manifest();
    cfg.targets = {"dff", "up_counter"};
    cfg.max_iterations = 1;
    cfg.backend.script = {testutil::read_file(testutil::repo_path("corpus/sessions/responses/prose_only.md")),
                          testutil::read_file(testutil::repo_path("corpus/pwm/up_counter.v"))};
    SessionLog log = run_session(cfg);
    CHECK(log.verdict == SessionVerdict::BudgetExhausted);
    CHECK(log.targets.size() == 1);
}

TEST_CASE("command backend: stdin, substitution, exit status and timeout") {
    BackendRequest req{"up_counter", 2, "hello prompt\n"};
    BackendReply cat = run_command("cat", req, 5);
    CHECK(cat.ok);
    CHECK(cat.text == "hello prompt\n");

    BackendReply sub = run_command("echo {module} {iteration}", req, 5);
    CHECK(sub.text == "up_counter 2\n");

    BackendReply fail = run_command("echo partial; exit 3", req, 5);
    CHECK_FALSE(fail.ok);
    CHECK(fail.error.find("status 3") != std::string::npos);

    auto t0 = std::chrono::steady_clock::now();
    BackendReply slow = run_command("sleep 10", req, 0.3);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK_FALSE(slow.ok);
    CHECK(slow.error.find("timed out") != std::string::npos);
    CHECK(secs < 3);

    BackendReply closed = run_command("exec >&-; sleep 10", req, 0.3);
    CHECK_FALSE(closed.ok);

    BackendRequest big{"m", 1, std::string(1 << 20, 'x')};
    BackendReply ignore = run_command("true", big, 5);
    CHECK(ignore.ok);
    BackendReply count = run_command("wc -c", big, 5);
    CHECK(std::stoul(count.text) == (1u << 20));
}

TEST_CASE("session: a failing command backend ends with backend-failure") {
    SessionConfig cfg;
    cfg.manifest = manifest();
    cfg.targets = {"dff"};
    cfg.max_iterations = 2;
    cfg.backend.kind = BackendSpec::Kind::Command;
    cfg.backend.command = "exit 1";
    cfg.backend.timeout_s = 5;
    SessionLog log = run_session(cfg);
    CHECK(log.verdict == SessionVerdict::BackendFailure);
    REQUIRE(log.targets[0].attempts.size() == 2);
    CHECK(log.targets[0].attempts[1].verdict == AttemptVerdict::BackendFailure);
}

TEST_CASE("session config errors") {
    testutil::TempDir tmp("orch");
    const std::string manifest_path = testutil::repo_path("corpus/pwm/pwm_manifest.json").string();
    auto load = [&](const std::string& text) {
        testutil::write_file(tmp / "s.json", text);
        return load_session_config(tmp / "s.json");
    };
    const std::string good_backend = R"("backend": {"kind": "command", "cmd": "cat"})";
    CHECK_NOTHROW(load(R"({"manifest": ")" + manifest_path + R"(", )" + good_backend + R"(, "out_dir": "o"})"));
    CHECK(load(R"({"manifest": ")" + manifest_path + R"(", )" + good_backend + R"(, "out_dir": "o"})").out_dir ==
          tmp / "o");
    CHECK_THROWS_AS(load("{not json"), ConfigError);
    CHECK_THROWS_AS(load("[]"), ConfigError);
    CHECK_THROWS_AS(load(R"({"manifest": "missing.json", )" + good_backend + R"(, "out_dir": "o"})"), ConfigError);
    CHECK_THROWS_AS(
        load(R"({"manifest": ")" + manifest_path + R"(", )" + good_backend + R"(, "out_dir": "o", "max_iterations": 0})"),
        ConfigError);
    CHECK_THROWS_AS(load(R"({"manifest": ")" + manifest_path + R"(", )" + good_backend + R"(, "out_dir": "o", "extra": 1})"),
                    ConfigError);
    CHECK_THROWS_AS(load(R"({"manifest": ")" + manifest_path + R"(", "backend": {"kind": "mock", "script": []}, "out_dir": "o"})"),
                    ConfigError);
    CHECK_THROWS_AS(load(R"({"manifest": ")" + manifest_path + R"(", "backend": {"kind": "http"}, "out_dir": "o"})"),
                    ConfigError);
    CHECK_THROWS_AS(
        load(R"({"manifest": ")" + manifest_path +
             R"(", "backend": {"kind": "command", "cmd": "cat", "timeout_s": 0}, "out_dir": "o"})"),
        ConfigError);
    CHECK_THROWS_AS(load(R"({"manifest": ")" + manifest_path + R"(", )" + good_backend +
                         R"(, "out_dir": "o", "role": {"preamble": ""}})"),
                    ConfigError);
    CHECK_THROWS_AS(load(R"({"manifest": ")" + manifest_path + R"(", )" + good_backend +
                         R"(, "out_dir": "o", "targets": ["ghost"]})"),
                    ConfigError);
    CHECK_THROWS_AS(load(R"({"manifest": ")" + manifest_path + R"(", )" + good_backend +
                         R"(, "out_dir": "o", "golden_check": {"duty": [300]}})"),
                    ConfigError);
}
