// SPDX-License-Identifier: Apache-2.0
#include "veriloop/cli/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "veriloop/frontend/parser.hpp"
#include "veriloop/frontend/preprocess.hpp"
#include "veriloop/hierarchy/hierarchy.hpp"
#include "veriloop/lint/lint.hpp"
#include "veriloop/orchestrator/session.hpp"
#include "veriloop/pwm/pwm.hpp"
#include "veriloop/sim/sim.hpp"
#include "veriloop/sim/vcd.hpp"

namespace veriloop::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Raised for anything that maps to exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_output(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << text)) throw UsageError("cannot write '" + path + "'");
}

lint::Format parse_format(const std::string& s) { return s == "json" ? lint::Format::Json : lint::Format::Text; }

struct Design {
    SourceManager sources;
    std::vector<frontend::ParseResult> files;
    std::vector<Diagnostic> diagnostics;  // parse-phase only

    std::vector<const frontend::Ast*> asts() const {
        std::vector<const frontend::Ast*> out;
        for (const auto& f : files) out.push_back(&f.ast);
        return out;
    }
    bool defines(const std::string& module) const {
        for (const auto& f : files)
            for (const auto& m : f.ast.modules)
                if (m.name == module) return true;
        return false;
    }
};

void load_sources(SourceManager& sources, const std::vector<std::string>& files) {
    for (const auto& f : files) {
        try {
            sources.load(f);
        } catch (const std::exception& e) {
            throw UsageError(e.what());
        }
    }
}

Design load_design(const std::vector<std::string>& paths) {
    Design d;
    load_sources(d.sources, paths);
    for (uint32_t id = 0; id < d.sources.size(); ++id) {
        d.files.push_back(frontend::parse_source(d.sources.file(id).text, id));
        for (const auto& diag : d.files.back().diagnostics) d.diagnostics.push_back(diag);
    }
    sort_diagnostics(d.diagnostics);
    return d;
}

std::string where(const std::optional<Span>& span, const SourceManager& sources) {
    if (!span) return "";
    return lint::source_name(span->file, sources) + ":" + std::to_string(span->line) + ":" +
           std::to_string(span->col) + ": ";
}

// Parse errors stop simulation-based commands with exit 1.
bool report_parse_errors(const Design& d, std::ostream& err) {
    if (!has_errors(d.diagnostics)) return false;
    err << lint::render_diagnostics(d.diagnostics, lint::Format::Text, d.sources);
    err << "error: the sources have syntax errors; nothing was simulated\n";
    return true;
}

std::optional<sim::ElaboratedDesign> elaborate_or_report(const Design& d, const std::string& top, std::ostream& err) {
    if (!d.defines(top)) throw UsageError("top module '" + top + "' is not defined in the given files");
    try {
        return sim::elaborate(d.asts(), top);
    } catch (const sim::SimError& e) {
        err << where(e.span, d.sources) << "error: " << e.what() << "\n";
        return std::nullopt;
    }
}

void write_trace(const sim::Trace& trace, const std::string& top, const std::string& vcd, const std::string& csv,
                 std::ostream& out) {
    if (!vcd.empty()) write_output(vcd, sim::write_vcd(trace, top));
    if (!csv.empty()) write_output(csv, sim::trace_to_csv(trace));
    if (vcd.empty() && csv.empty()) out << sim::trace_to_csv(trace);
}

struct LintArgs {
    std::vector<std::string> files;
    std::string format = "text";
    bool deny_warnings = false;
    bool intra = false;
    std::vector<std::string> rules;
    std::vector<std::string> defines;
};

int cmd_lint(const LintArgs& a, std::ostream& out, std::ostream& err) {
    lint::LintConfig cfg;
    cfg.deny_warnings = a.deny_warnings;
    cfg.intra_process_multi_drive = a.intra;
    for (const auto& r : a.rules) {
        auto eq = r.find('=');
        if (eq == std::string::npos || !cfg.set(r.substr(0, eq), r.substr(eq + 1)))
            throw UsageError("--rule expects CODE=off|warn|error, got '" + r + "'");
    }
    if (auto unknown = cfg.unknown_codes(); !unknown.empty())
        throw UsageError("unknown rule code '" + unknown.front() + "'");
    frontend::MacroTable defines;
    for (const auto& d : a.defines)
        if (!frontend::add_define(defines, d)) throw UsageError("bad --define '" + d + "'");

    SourceManager sources;
    load_sources(sources, a.files);
    lint::Analysis analysis = lint::analyze(sources, defines, cfg);
    out << lint::render_diagnostics(analysis.diagnostics, parse_format(a.format), sources);
    (void)err;
    return has_errors(analysis.diagnostics) ? kExitFindings : kExitClean;
}

struct HierArgs {
    std::string manifest;
    std::vector<std::string> files;
    std::string format = "text";
    bool undeclared_error = false;
};

int cmd_hier(const HierArgs& a, std::ostream& out, std::ostream&) {
    hierarchy::DesignManifest manifest;
    try {
        manifest = hierarchy::load_manifest_file(a.manifest);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    Design d = load_design(a.files);
    std::vector<const frontend::ParseResult*> files;
    for (const auto& f : d.files) files.push_back(&f);
    hierarchy::HierReport rep = hierarchy::check(manifest, files, {a.undeclared_error});
    out << lint::render_diagnostics(rep.diagnostics, parse_format(a.format), d.sources);
    return rep.pass() ? kExitClean : kExitFindings;
}

struct SimArgs {
    std::vector<std::string> files;
    std::string top;
    size_t cycles = 0;
    std::string stimulus;
    std::string vcd, csv;
    std::vector<std::string> record;
};

int cmd_sim(const SimArgs& a, std::ostream& out, std::ostream& err) {
    if (a.cycles < 1) throw UsageError("--cycles must be at least 1");
    sim::Stimulus stim;
    if (!a.stimulus.empty()) {
        std::ifstream in(a.stimulus, std::ios::binary);
        if (!in) throw UsageError("cannot read stimulus '" + a.stimulus + "'");
        std::ostringstream text;
        text << in.rdbuf();
        try {
            stim = sim::load_stimulus(text.str());
        } catch (const sim::SimError& e) {
            throw UsageError(e.what());
        }
    }
    Design d = load_design(a.files);
    if (report_parse_errors(d, err)) return kExitFindings;
    auto design = elaborate_or_report(d, a.top, err);
    if (!design) return kExitFindings;
    for (const auto& w : design->warnings)
        err << where(w.span, d.sources) << "warning[" << w.code << "] " << w.message << "\n";
    sim::Trace trace;
    try {
        trace = sim::run(*design, stim, a.cycles, a.record);
    } catch (const sim::StimulusError& e) {
        throw UsageError(e.what());
    } catch (const sim::SimError& e) {
        err << where(e.span, d.sources) << "error: " << e.what() << "\n";
        return kExitFindings;
    }
    write_trace(trace, a.top, a.vcd, a.csv, out);
    return kExitClean;
}

struct GoldenArgs {
    std::optional<uint32_t> duty;
    bool sweep = false;
    size_t segment = 512;
    size_t cycles = 2048;
    size_t reset_cycles = 4;
    std::string vcd, csv;
};

int cmd_golden(const GoldenArgs& a, std::ostream& out, std::ostream&) {
    if (a.duty.has_value() == a.sweep) throw UsageError("give exactly one of --duty and --sweep");
    if (a.cycles < 1) throw UsageError("--cycles must be at least 1");
    pwm::PwmConfig cfg;
    if (a.duty && *a.duty >= cfg.resolution)
        throw UsageError("--duty " + std::to_string(*a.duty) + " is outside 0.." + std::to_string(cfg.resolution - 1));
    if (a.segment < 1) throw UsageError("--segment must be at least 1");
    pwm::Schedule duty = a.sweep ? pwm::duty_sweep(a.segment) : pwm::Schedule{{0, *a.duty}};
    sim::Trace trace = pwm::run_golden(cfg, duty, a.reset_cycles, a.cycles);
    write_trace(trace, "pwm_golden", a.vcd, a.csv, out);
    return kExitClean;
}

struct VerifyArgs {
    std::vector<std::string> files;
    std::string top = "pwm_top";
    size_t cycles = 2048;
    size_t reset_cycles = 4;
    std::string duties_text = "0,64,128,192";
    std::string format = "text";
};

std::vector<uint32_t> parse_duties(const std::string& text) {
    std::vector<uint32_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        size_t used = 0;
        unsigned long v = 0;
        try {
            v = std::stoul(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) throw UsageError("--duties expects numbers, got '" + item + "'");
        out.push_back(static_cast<uint32_t>(std::min<unsigned long>(v, UINT32_MAX)));
    }
    if (out.empty()) throw UsageError("--duties needs at least one value");
    return out;
}

int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
    if (a.cycles < 1) throw UsageError("--cycles must be at least 1");
    if (a.reset_cycles < 1) throw UsageError("--reset-cycles must be at least 1");
    pwm::PwmConfig cfg;
    const std::vector<uint32_t> duties = parse_duties(a.duties_text);
    for (uint32_t d : duties)
        if (d >= cfg.resolution) throw UsageError("duty " + std::to_string(d) + " is out of range");
    Design d = load_design(a.files);
    if (report_parse_errors(d, err)) return kExitFindings;
    auto design = elaborate_or_report(d, a.top, err);
    if (!design) return kExitFindings;

    const pwm::SignalMap map = pwm::default_verify_map();
    bool pass = true;
    json report = json::array();
    for (uint32_t duty : duties) {
        pwm::Schedule sched{{0, duty}};
        sim::Trace expected = pwm::run_golden(cfg, sched, a.reset_cycles, a.cycles);
        pwm::CompareReport rep;
        try {
            sim::Trace actual = sim::run(*design, pwm::to_stimulus(sched, a.reset_cycles), a.cycles);
            rep = pwm::compare_traces(expected, actual, map);
        } catch (const sim::StimulusError& e) {
            throw UsageError(e.what());
        } catch (const std::exception& e) {
            err << "error: duty " << duty << ": " << e.what() << "\n";
            return kExitFindings;
        }
        pass = pass && rep.empty();
        json mism = json::array();
        for (const auto& m : rep.mismatches)
            mism.push_back({{"signal", m.signal}, {"cycle", m.cycle}, {"expected", m.expected}, {"actual", m.actual}});
        report.push_back({{"duty", duty}, {"cycles", a.cycles}, {"total", rep.total}, {"mismatches", mism}});
        if (a.format == "text") {
            if (rep.empty()) {
                out << "duty " << duty << ": match (" << map.size() << " signals, " << a.cycles << " cycles)\n";
            } else {
                out << "duty " << duty << ": " << rep.mismatches.size() << " signals differ, " << rep.total
                    << " mismatching samples\n";
                for (const auto& m : rep.mismatches)
                    out << "  " << m.signal << " first differs at cycle " << m.cycle << ": expected " << m.expected
                        << ", got " << m.actual << "\n";
            }
        }
    }
    if (a.format == "json")
        out << json{{"pass", pass}, {"duties", report}}.dump(2) << "\n";
    else
        out << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? kExitClean : kExitFindings;
}

struct PipelineArgs {
    std::string config;
    std::string out_dir;
};

int cmd_pipeline(const PipelineArgs& a, std::ostream& out, std::ostream&) {
    orchestrator::SessionConfig cfg;
    try {
        cfg = orchestrator::load_session_config(a.config);
        if (!a.out_dir.empty()) cfg.out_dir = a.out_dir;
    } catch (const orchestrator::ConfigError& e) {
        throw UsageError(e.what());
    }
    orchestrator::SessionLog log;
    try {
        log = orchestrator::run_session(cfg);
    } catch (const orchestrator::ConfigError& e) {
        throw UsageError(e.what());
    } catch (const fs::filesystem_error& e) {
        throw UsageError(e.what());
    }
    for (const auto& t : log.targets)
        out << t.module << ": " << orchestrator::verdict_name(t.verdict) << " after " << t.attempts.size()
            << (t.attempts.size() == 1 ? " attempt\n" : " attempts\n");
    out << "session: " << orchestrator::verdict_name(log.verdict) << " (log: " << (cfg.out_dir / "session.json").string()
        << ")\n";
    return log.verdict == orchestrator::SessionVerdict::Converged ? kExitClean : kExitFindings;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Verilog checking, simulation and generation-feedback toolkit", "veriloop"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "veriloop 0.1.0");
    const std::vector<std::string> formats{"text", "json"};

    LintArgs lint_args;
    auto* lint_cmd = app.add_subcommand("lint", "Parse and lint files as one design");
    lint_cmd->add_option("files", lint_args.files, "Verilog sources")->required();
    lint_cmd->add_option("--format", lint_args.format, "text or json")->check(CLI::IsMember(formats));
    lint_cmd->add_flag("--deny-warnings", lint_args.deny_warnings, "Treat warnings as errors");
    lint_cmd->add_option("--rule", lint_args.rules, "CODE=off|warn|error (repeatable)")->allow_extra_args(false);
    lint_cmd->add_flag("--multi-drive-intra", lint_args.intra, "Report same-block re-assignments (LLM003 warning)");
    lint_cmd->add_option("-D,--define", lint_args.defines, "Macro NAME or NAME=VALUE (repeatable)")->allow_extra_args(false);

    HierArgs hier_args;
    auto* hier_cmd = app.add_subcommand("hier-check", "Check sources against a design manifest");
    hier_cmd->add_option("--manifest", hier_args.manifest, "Manifest JSON")->required();
    hier_cmd->add_option("files", hier_args.files, "Verilog sources")->required();
    hier_cmd->add_option("--format", hier_args.format, "text or json")->check(CLI::IsMember(formats));
    hier_cmd->add_flag("--undeclared-error", hier_args.undeclared_error, "Report undeclared modules as errors");

    SimArgs sim_args;
    auto* sim_cmd = app.add_subcommand("sim", "Simulate a design cycle by cycle");
    sim_cmd->add_option("files", sim_args.files, "Verilog sources")->required();
    sim_cmd->add_option("--top", sim_args.top, "Top module")->required();
    sim_cmd->add_option("--cycles", sim_args.cycles, "Clock cycles")->required();
    sim_cmd->add_option("--stimulus", sim_args.stimulus, "Stimulus JSON");
    sim_cmd->add_option("--vcd", sim_args.vcd, "Write a VCD file");
    sim_cmd->add_option("--csv", sim_args.csv, "Write a CSV file");
    sim_cmd->add_option("--record", sim_args.record, "Signal to record, repeatable (default: all)")->allow_extra_args(false);

    GoldenArgs golden_args;
    auto* golden_cmd = app.add_subcommand("pwm-golden", "Trace of the reference three-phase PWM model");
    golden_cmd->add_option("--duty", golden_args.duty, "Constant duty 0..255");
    golden_cmd->add_flag("--sweep", golden_args.sweep, "Duty 0, 64, 128, 192 in equal segments");
    golden_cmd->add_option("--segment", golden_args.segment, "Cycles per sweep step");
    golden_cmd->add_option("--cycles", golden_args.cycles, "Clock cycles");
    golden_cmd->add_option("--reset-cycles", golden_args.reset_cycles, "Cycles with reset asserted");
    golden_cmd->add_option("--vcd", golden_args.vcd, "Write a VCD file");
    golden_cmd->add_option("--csv", golden_args.csv, "Write a CSV file");

    VerifyArgs verify_args;
    auto* verify_cmd = app.add_subcommand("verify-pwm", "Compare a PWM design with the reference model");
    verify_cmd->add_option("files", verify_args.files, "Verilog sources")->required();
    verify_cmd->add_option("--top", verify_args.top, "Top module");
    verify_cmd->add_option("--cycles", verify_args.cycles, "Clock cycles per duty");
    verify_cmd->add_option("--reset-cycles", verify_args.reset_cycles, "Cycles with reset asserted");
    verify_cmd->add_option("--duties", verify_args.duties_text, "Comma-separated duty values");
    verify_cmd->add_option("--format", verify_args.format, "text or json")->check(CLI::IsMember(formats));

    PipelineArgs pipe_args;
    auto* pipe_cmd = app.add_subcommand("pipeline", "Run the generate/check/feedback loop");
    pipe_cmd->add_option("--config", pipe_args.config, "Session config JSON")->required();
    pipe_cmd->add_option("--out-dir", pipe_args.out_dir, "Override the config's out_dir");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        if (argc <= 1) err << app.help();
        return kExitUsage;
    }

    try {
        if (*lint_cmd) return cmd_lint(lint_args, out, err);
        if (*hier_cmd) return cmd_hier(hier_args, out, err);
        if (*sim_cmd) return cmd_sim(sim_args, out, err);
        if (*golden_cmd) return cmd_golden(golden_args, out, err);
        if (*verify_cmd) return cmd_verify(verify_args, out, err);
        if (*pipe_cmd) return cmd_pipeline(pipe_args, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitInternal;
}

}  // namespace veriloop::cli
