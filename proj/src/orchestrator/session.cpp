// SPDX-License-Identifier: Apache-2.0
#include "veriloop/orchestrator/session.hpp"

#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

#include "veriloop/hierarchy/hierarchy.hpp"
#include "veriloop/lint/lint.hpp"
#include "veriloop/orchestrator/extract.hpp"
#include "veriloop/pwm/pwm.hpp"
#include "veriloop/sim/sim.hpp"

namespace veriloop::orchestrator {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view verdict_name(AttemptVerdict v) {
    switch (v) {
        case AttemptVerdict::Clean: return "clean";
        case AttemptVerdict::Dirty: return "dirty";
        case AttemptVerdict::ExtractionFailed: return "extraction-failed";
        case AttemptVerdict::BackendFailure: return "backend-failure";
    }
    return "?";
}

std::string_view verdict_name(SessionVerdict v) {
    switch (v) {
        case SessionVerdict::Converged: return "converged";
        case SessionVerdict::BudgetExhausted: return "budget-exhausted";
        case SessionVerdict::BackendFailure: return "backend-failure";
    }
    return "?";
}

void SessionConfig::validate() const {
    if (max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
    role.validate();
    backend.validate();
    for (const auto& t : targets)
        if (!manifest.find(t)) throw ConfigError("target '" + t + "' is not in the manifest");
    if (golden) {
        if (golden->duties.empty()) throw ConfigError("golden_check needs at least one duty value");
        for (uint32_t d : golden->duties)
            if (d > 255) throw ConfigError("golden_check duty " + std::to_string(d) + " is outside 0..255");
        if (golden->cycles < 1) throw ConfigError("golden_check cycles must be at least 1");
        if (golden->reset_cycles < 1) throw ConfigError("golden_check reset_cycles must be at least 1");
    }
}

namespace {

std::string read_text(const fs::path& p, const char* what) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError(std::string("cannot read ") + what + " '" + p.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

void only_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
    for (const auto& [k, v] : obj.items()) {
        bool known = false;
        for (const char* key : keys) known = known || k == key;
        if (!known) throw ConfigError("unknown key '" + k + "' in " + where);
    }
}

template <class T>
T get_field(const json& obj, const char* key, const std::string& where) {
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("'" + std::string(key) + "' in " + where + " is missing or has the wrong type");
    }
}

}  // namespace

SessionConfig load_session_config(const fs::path& path) {
    std::string text = read_text(path, "session config");
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("session config is not valid JSON: " + std::string(e.what()));
    }
    if (!doc.is_object()) throw ConfigError("session config must be a JSON object");
    only_keys(doc, {"manifest", "backend", "max_iterations", "out_dir", "golden_check", "role", "targets"},
              "session config");
    const fs::path base = path.parent_path().empty() ? fs::path(".") : path.parent_path();

    SessionConfig c;
    c.snapshot = doc;
    try {
        c.manifest = hierarchy::load_manifest_file(resolve(base, get_field<std::string>(doc, "manifest", "config")));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::runtime_error& e) {
        throw ConfigError(e.what());
    }

    if (!doc.contains("backend") || !doc["backend"].is_object()) throw ConfigError("'backend' object is required");
    const json& b = doc["backend"];
    std::string kind = get_field<std::string>(b, "kind", "backend");
    if (kind == "mock") {
        only_keys(b, {"kind", "script"}, "backend");
        for (const auto& p : get_field<std::vector<std::string>>(b, "script", "backend"))
            c.backend.script.push_back(read_text(resolve(base, p), "mock script"));
        c.backend.kind = BackendSpec::Kind::Mock;
    } else if (kind == "command") {
        only_keys(b, {"kind", "cmd", "timeout_s"}, "backend");
        c.backend.kind = BackendSpec::Kind::Command;
        c.backend.command = get_field<std::string>(b, "cmd", "backend");
        if (b.contains("timeout_s")) c.backend.timeout_s = get_field<double>(b, "timeout_s", "backend");
    } else {
        throw ConfigError("backend kind must be \"mock\" or \"command\", not \"" + kind + "\"");
    }

    if (doc.contains("max_iterations")) {
        if (!doc["max_iterations"].is_number_integer()) throw ConfigError("max_iterations must be an integer");
        c.max_iterations = doc["max_iterations"].get<int>();
    }
    c.out_dir = resolve(base, get_field<std::string>(doc, "out_dir", "config"));

    if (doc.contains("golden_check")) {
        const json& g = doc["golden_check"];
        if (!g.is_object()) throw ConfigError("golden_check must be an object");
        only_keys(g, {"duty", "cycles", "reset_cycles"}, "golden_check");
        GoldenCheck gc;
        if (g.contains("duty")) gc.duties = get_field<std::vector<uint32_t>>(g, "duty", "golden_check");
        if (g.contains("cycles")) gc.cycles = get_field<size_t>(g, "cycles", "golden_check");
        if (g.contains("reset_cycles")) gc.reset_cycles = get_field<size_t>(g, "reset_cycles", "golden_check");
        c.golden = gc;
    }
    if (doc.contains("role")) {
        const json& r = doc["role"];
        if (!r.is_object()) throw ConfigError("role must be an object");
        only_keys(r, {"preamble", "style"}, "role");
        if (r.contains("preamble")) c.role.preamble = get_field<std::string>(r, "preamble", "role");
        if (r.contains("style")) {
            c.role.style.clear();
            if (!r["style"].is_array()) throw ConfigError("role style must be an array");
            for (const auto& s : r["style"])
                c.role.style.push_back({get_field<std::string>(s, "name", "role style"),
                                        get_field<std::string>(s, "text", "role style")});
        }
    }
    if (doc.contains("targets")) c.targets = get_field<std::vector<std::string>>(doc, "targets", "config");
    c.validate();
    return c;
}

namespace {

FeedbackItem to_feedback(const Diagnostic& d, const SourceManager& sources) {
    FeedbackItem f;
    f.code = d.code;
    f.severity = std::string(severity_name(d.severity));
    f.location = lint::source_name(d.span.file, sources);
    if (d.span.file < sources.size())
        f.location += ":" + std::to_string(d.span.line) + ":" + std::to_string(d.span.col);
    f.message = d.message;
    f.hint = d.hint;
    return f;
}

Diagnostic sim_diag(const std::string& code, std::string message, std::string hint, std::optional<Span> span = {}) {
    Diagnostic d;
    d.code = code;
    d.severity = Severity::Error;
    if (span) {
        d.span = *span;
    } else {
        d.span.file = kSimulationFile;
    }
    d.message = std::move(message);
    d.hint = std::move(hint);
    return d;
}

std::vector<Diagnostic> golden_diagnostics(const SessionConfig& config, const lint::Analysis& analysis) {
    std::vector<Diagnostic> out;
    const GoldenCheck& g = *config.golden;
    sim::ElaboratedDesign design;
    try {
        design = sim::elaborate(analysis.asts(), config.manifest.top);
    } catch (const sim::SimError& e) {
        out.push_back(sim_diag("SIM000", std::string("the design cannot be simulated: ") + e.what(),
                               "use only the synthesizable single-clock subset", e.span));
        return out;
    }
    pwm::PwmConfig pc;
    pwm::SignalMap map = pwm::default_verify_map();
    for (uint32_t duty : g.duties) {
        pwm::Schedule sched{{0, duty}};
        try {
            sim::Trace expected = pwm::run_golden(pc, sched, g.reset_cycles, g.cycles);
            sim::Trace actual = sim::run(design, pwm::to_stimulus(sched, g.reset_cycles), g.cycles);
            pwm::CompareReport rep = pwm::compare_traces(expected, actual, map);
            for (const auto& m : rep.mismatches)
                out.push_back(sim_diag(
                    "SIM001",
                    "duty " + std::to_string(duty) + ": '" + m.signal + "' differs from the golden model from cycle " +
                        std::to_string(m.cycle) + " (expected " + std::to_string(m.expected) + ", got " +
                        std::to_string(m.actual) + ")",
                    "compare the counter, comparator and dead-time timing with the task description"));
        } catch (const sim::SimError& e) {
            out.push_back(sim_diag("SIM000", "duty " + std::to_string(duty) + ": simulation failed: " + e.what(),
                                   "", e.span));
            break;
        } catch (const pwm::TraceStructureError& e) {
            out.push_back(sim_diag("SIM000", std::string("the simulated design cannot be compared: ") + e.what(),
                                   "keep the instance and signal names of the task description"));
            break;
        }
    }
    return out;
}

}  // namespace

CheckResult check_candidate(const SessionConfig& config, const std::string& module,
                            const std::vector<SourceUnit>& units) {
    SourceManager sources;
    for (const auto& u : units) sources.add(u.name, u.text);
    lint::Analysis analysis = lint::analyze(sources, {}, lint::LintConfig{});
    std::vector<Diagnostic> diags = analysis.diagnostics;

    std::vector<const frontend::ParseResult*> files;
    for (const auto& f : analysis.files) files.push_back(&f);
    auto hier = hierarchy::check_module(config.manifest, module, files);
    diags.insert(diags.end(), hier.diagnostics.begin(), hier.diagnostics.end());

    // Simulation feedback only makes sense once the static checks pass.
    if (config.golden && module == config.manifest.top && !has_errors(diags)) {
        auto sim = golden_diagnostics(config, analysis);
        diags.insert(diags.end(), sim.begin(), sim.end());
    }
    sort_diagnostics(diags);

    CheckResult r;
    for (const auto& d : diags) r.feedback.push_back(to_feedback(d, sources));
    r.diagnostics = std::move(diags);
    return r;
}

namespace {

std::vector<SourceUnit> name_units(const std::vector<std::string>& texts) {
    std::vector<SourceUnit> out;
    std::set<std::string> used;
    for (size_t i = 0; i < texts.size(); ++i) {
        auto mods = declared_modules(texts[i]);
        std::string stem = mods.empty() ? "unit" + std::to_string(i + 1) : mods.front();
        std::string name = stem + ".v";
        for (int k = 2; used.count(name); ++k) name = stem + "-" + std::to_string(k) + ".v";
        used.insert(name);
        out.push_back({name, texts[i]});
    }
    return out;
}

// Earlier accepted units stay in the design unless the new response
// redefines one of their modules.
std::vector<SourceUnit> assemble(const std::vector<SourceUnit>& accepted, const std::vector<SourceUnit>& fresh) {
    std::set<std::string> redefined, names;
    for (const auto& u : fresh) {
        for (const auto& m : declared_modules(u.text)) redefined.insert(m);
        names.insert(u.name);
    }
    std::vector<SourceUnit> out;
    for (const auto& u : accepted) {
        bool keep = true;
        for (const auto& m : declared_modules(u.text)) keep = keep && !redefined.count(m);
        if (keep && !names.count(u.name)) out.push_back(u);
    }
    out.insert(out.end(), fresh.begin(), fresh.end());
    return out;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
    out << text;
}

json feedback_json(const FeedbackItem& f) {
    return {{"rule", f.code}, {"severity", f.severity}, {"location", f.location}, {"message", f.message},
            {"hint", f.hint}};
}

void persist(const fs::path& dir, const Attempt& a, const std::vector<std::string>& design_files) {
    fs::create_directories(dir);
    std::string n = std::to_string(a.iteration);
    write_file(dir / ("prompt-" + n + ".txt"), a.prompt);
    write_file(dir / ("response-" + n + ".txt"), a.response);
    fs::path src = dir / ("src-" + n);
    fs::create_directories(src);
    for (const auto& u : a.units) write_file(src / u.name, u.text);
    SourceManager names;
    for (const auto& f : design_files) names.add(f, "");
    write_file(dir / ("diags-" + n + ".json"), lint::render_diagnostics(a.diagnostics, lint::Format::Json, names));
}

}  // namespace

json SessionLog::to_json(bool timing) const {
    json targets_json = json::array();
    for (const auto& t : targets) {
        json attempts = json::array();
        for (const auto& a : t.attempts) {
            json units = json::array();
            for (const auto& u : a.units) units.push_back(u.name);
            json diags = json::array();
            for (const auto& f : a.feedback) diags.push_back(feedback_json(f));
            json aj = {{"iteration", a.iteration}, {"verdict", verdict_name(a.verdict)}, {"units", units},
                       {"diagnostics", diags}};
            if (!a.backend_error.empty()) aj["backend_error"] = a.backend_error;
            if (timing) aj["wall_ms"] = a.wall_ms;
            attempts.push_back(aj);
        }
        targets_json.push_back({{"module", t.module}, {"verdict", verdict_name(t.verdict)}, {"attempts", attempts}});
    }
    return {{"config", config}, {"verdict", verdict_name(verdict)}, {"targets", targets_json}};
}

SessionLog run_session(const SessionConfig& config) {
    auto backend = make_backend(config.backend);
    return run_session(config, *backend);
}

SessionLog run_session(const SessionConfig& config, Backend& backend) {
    config.validate();
    SessionLog log;
    log.config = config.snapshot;
    std::vector<std::string> order = config.targets.empty() ? config.manifest.topological_order() : config.targets;
    std::vector<SourceUnit> accepted;

    for (const auto& module : order) {
        TargetLog target;
        target.module = module;
        std::vector<FeedbackItem> prior;
        for (int it = 1; it <= config.max_iterations; ++it) {
            auto t0 = std::chrono::steady_clock::now();
            Attempt a;
            a.module = module;
            a.iteration = it;
            a.prompt = build_prompt(config.manifest, module, config.role, prior).render();
            BackendReply reply = backend.generate({module, it, a.prompt});
            a.response = reply.text;
            std::vector<std::string> design_files;
            if (!reply.ok) {
                a.verdict = AttemptVerdict::BackendFailure;
                a.backend_error = reply.error;
            } else if (Extraction ex = extract_code(reply.text); !ex.ok()) {
                a.verdict = AttemptVerdict::ExtractionFailed;
                Diagnostic d;
                d.code = "EXT001";
                d.span.file = kResponseFile;
                d.message = "the response contains no Verilog module";
                d.hint = "reply with the complete module inside a ```verilog fenced block";
                a.diagnostics = {d};
                a.feedback = {to_feedback(d, SourceManager{})};
                prior = a.feedback;
            } else {
                a.units = name_units(ex.units);
                std::vector<SourceUnit> design = assemble(accepted, a.units);
                for (const auto& u : design) design_files.push_back(u.name);
                CheckResult r = check_candidate(config, module, design);
                a.diagnostics = std::move(r.diagnostics);
                a.feedback = std::move(r.feedback);
                if (has_errors(a.diagnostics)) {
                    a.verdict = AttemptVerdict::Dirty;
                    prior = a.feedback;
                } else {
                    a.verdict = AttemptVerdict::Clean;
                    accepted = std::move(design);
                }
            }
            a.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            if (!config.out_dir.empty()) persist(config.out_dir / module, a, design_files);
            target.attempts.push_back(std::move(a));
            if (target.attempts.back().verdict == AttemptVerdict::Clean) break;
        }

        bool all_backend = true;
        for (const auto& a : target.attempts) all_backend = all_backend && a.verdict == AttemptVerdict::BackendFailure;
        if (target.attempts.back().verdict == AttemptVerdict::Clean)
            target.verdict = SessionVerdict::Converged;
        else
            target.verdict = all_backend ? SessionVerdict::BackendFailure : SessionVerdict::BudgetExhausted;
        log.verdict = target.verdict;
        log.targets.push_back(std::move(target));
        if (log.verdict != SessionVerdict::Converged) break;
    }
    if (!config.out_dir.empty()) {
        fs::create_directories(config.out_dir);
        write_file(config.out_dir / "session.json", log.to_json(true).dump(2) + "\n");
    }
    return log;
}

}  // namespace veriloop::orchestrator
