// SPDX-License-Identifier: Apache-2.0
#include "veriloop/orchestrator/prompt.hpp"

#include <iomanip>
#include <sstream>

namespace veriloop::orchestrator {

RoleConfig RoleConfig::defaults() {
    RoleConfig r;
    r.preamble =
        "You are a specialist in digital integrated circuit (IC) design. You write clean, synthesizable "
        "Verilog-2005 RTL for ASIC flows and follow the coding style below exactly.";
    r.style = {
        {"begin-end", "Close every begin with end; never use braces to delimit statement blocks."},
        {"case-endcase", "Terminate every case statement with endcase and give it a default branch."},
        {"single-driver", "Drive each signal from exactly one always block or one continuous assignment."},
        {"clock-reset",
         "Write sequential logic as one always block on the clock edge and the reset edge, testing the reset first "
         "in an if/else."},
        {"assignment-kind", "Use nonblocking assignments (<=) in clocked blocks and blocking assignments (=) in "
                            "combinational blocks."},
        {"complete-comb", "In combinational always @(*) blocks, assign every output on every path."},
        {"synthesizable", "Use only synthesizable constructs: no initial blocks, delays or system tasks."},
        {"interface", "Keep port names, order, directions and widths exactly as given in the interface."},
        {"output-format", "Reply with the complete module in a single ```verilog fenced block."},
    };
    return r;
}

void RoleConfig::validate() const {
    if (preamble.find_first_not_of(" \t\r\n") == std::string::npos)
        throw ConfigError("role preamble must not be empty");
    for (const auto& rule : style)
        if (rule.name.empty() || rule.text.empty()) throw ConfigError("style rules need a name and a text");
}

std::string render_feedback_item(const FeedbackItem& item) {
    std::string line = "- [" + item.code + "] " + item.severity + " at " + item.location + ": " + item.message;
    if (!item.hint.empty()) line += " (hint: " + item.hint + ")";
    return line;
}

namespace {

std::string port_line(const hierarchy::PortSpec& p) {
    std::ostringstream os;
    os << "  - " << frontend::direction_name(p.dir) << " " << p.name << ", " << p.width
       << (p.width == 1 ? " bit" : " bits");
    if (p.width > 1) os << " [" << p.width - 1 << ":0]";
    return os.str();
}

}  // namespace

RolePrompt build_prompt(const hierarchy::DesignManifest& manifest, std::string_view module, const RoleConfig& role,
                        const std::vector<FeedbackItem>& prior) {
    role.validate();
    const hierarchy::ModuleSpec* spec = manifest.find(module);
    if (!spec) throw ConfigError("module '" + std::string(module) + "' is not in the manifest");

    RolePrompt p;
    p.preamble = role.preamble;
    for (const auto& rule : role.style) p.style.push_back("- " + rule.text + " (" + rule.name + ")");

    std::ostringstream itf;
    itf << "Module `" << spec->name << "` with these ports, in order:\n";
    for (const auto& port : spec->ports) itf << port_line(port) << "\n";
    p.interface = itf.str();

    std::ostringstream cr;
    const auto& clk = manifest.clock;
    const auto& rst = manifest.reset;
    cr << "Clock: `" << clk.name << "`, rising edge";
    if (clk.frequency_hz) cr << ", " << std::setprecision(12) << *clk.frequency_hz << " Hz";
    cr << ".\n";
    cr << "Reset: `" << rst.name << "`, active " << (rst.active_low ? "low" : "high") << ", "
       << (rst.async ? "asynchronous" : "synchronous");
    if (rst.async) cr << " (list " << (rst.active_low ? "negedge " : "posedge ") << rst.name << " in the sensitivity list)";
    cr << ".\n";
    if (!spec->find_port(clk.name)) cr << "This module has no clock port; it is purely combinational.\n";
    p.clock_reset = cr.str();

    std::ostringstream task;
    task << "Write the Verilog module `" << spec->name << "`.";
    if (!spec->description.empty()) task << " " << spec->description;
    task << "\n";
    if (!spec->children.empty()) {
        task << "It must instantiate exactly these submodules (module, instance name):\n";
        for (const auto& c : spec->children) task << "  - " << c.module << " " << c.instance << "\n";
        task << "The submodules already exist; do not redefine them.\n";
    }
    p.task = task.str();
    p.feedback = prior;
    return p;
}

std::string RolePrompt::render() const {
    std::ostringstream os;
    os << "## Role\n" << preamble << "\n\n";
    os << "## Coding style\n";
    for (const auto& s : style) os << s << "\n";
    os << "\n## Interface\n" << interface << "\n";
    os << "## Clock and reset\n" << clock_reset << "\n";
    os << "## Task\n" << task;
    if (!feedback.empty()) {
        os << "\n## Feedback\n"
           << "The previous attempt had the problems below. Correct every one of them and regenerate the complete "
              "module.\n";
        for (const auto& f : feedback) os << render_feedback_item(f) << "\n";
    }
    return os.str();
}

}  // namespace veriloop::orchestrator
