// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "veriloop/diagnostic.hpp"
#include "veriloop/hierarchy/manifest.hpp"
#include "veriloop/orchestrator/backend.hpp"
#include "veriloop/orchestrator/prompt.hpp"

namespace veriloop::orchestrator {

struct GoldenCheck {
    std::vector<uint32_t> duties{0, 64, 128, 192};
    size_t cycles = 2048;
    size_t reset_cycles = 4;
};

struct SessionConfig {
    hierarchy::DesignManifest manifest;
    RoleConfig role = RoleConfig::defaults();
    BackendSpec backend;
    int max_iterations = 5;
    std::filesystem::path out_dir;  // empty: keep artifacts in memory only
    std::optional<GoldenCheck> golden;
    std::vector<std::string> targets;  // empty: every manifest module, leaves first
    nlohmann::json snapshot;           // the config as loaded, for the log

    /// Throws ConfigError.
    void validate() const;
};

/// Reads a session config file. Relative paths inside it resolve against the
/// file's directory. Throws ConfigError.
SessionConfig load_session_config(const std::filesystem::path& path);

enum class AttemptVerdict { Clean, Dirty, ExtractionFailed, BackendFailure };
enum class SessionVerdict { Converged, BudgetExhausted, BackendFailure };

std::string_view verdict_name(AttemptVerdict v);
std::string_view verdict_name(SessionVerdict v);

struct SourceUnit {
    std::string name;  // file name shown in diagnostics
    std::string text;
};

struct Attempt {
    std::string module;
    int iteration = 1;
    std::string prompt;
    std::string response;
    std::string backend_error;
    std::vector<SourceUnit> units;
    std::vector<Diagnostic> diagnostics;
    std::vector<FeedbackItem> feedback;  // diagnostics rendered for the next prompt
    AttemptVerdict verdict = AttemptVerdict::Dirty;
    double wall_ms = 0;
};

struct TargetLog {
    std::string module;
    std::vector<Attempt> attempts;
    SessionVerdict verdict = SessionVerdict::BudgetExhausted;
};

struct SessionLog {
    nlohmann::json config;
    std::vector<TargetLog> targets;
    SessionVerdict verdict = SessionVerdict::Converged;

    /// Log contents; wall-clock fields only when `timing` is set.
    nlohmann::json to_json(bool timing = true) const;
};

/// Runs the generate/check/feedback loop for each target in order and stops
/// at the first target that does not converge. Artifacts go to
/// out_dir/<module>/ and out_dir/session.json when out_dir is set.
SessionLog run_session(const SessionConfig& config, Backend& backend);
SessionLog run_session(const SessionConfig& config);

/// Diagnostics for one candidate design: parse, lint, hierarchy (for
/// `module`) and, when clean and configured, the golden comparison.
struct CheckResult {
    std::vector<Diagnostic> diagnostics;
    std::vector<FeedbackItem> feedback;
};
CheckResult check_candidate(const SessionConfig& config, const std::string& module,
                            const std::vector<SourceUnit>& units);

}  // namespace veriloop::orchestrator
