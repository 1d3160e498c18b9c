// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "veriloop/hierarchy/manifest.hpp"

namespace veriloop::orchestrator {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StyleRule {
    std::string name;
    std::string text;  // imperative sentence
};

struct RoleConfig {
    std::string preamble;
    std::vector<StyleRule> style;

    /// The shipped role: an IC design specialist with an explicit coding style.
    static RoleConfig defaults();

    /// Throws ConfigError on an empty preamble or an empty rule.
    void validate() const;
};

/// One prior finding as shown to the generator.
struct FeedbackItem {
    std::string code;
    std::string severity;
    std::string location;  // "file:line:col"
    std::string message;
    std::string hint;
};

struct RolePrompt {
    std::string preamble;
    std::vector<std::string> style;  // rendered bullets, in contract order
    std::string interface;
    std::string clock_reset;
    std::string task;
    std::vector<FeedbackItem> feedback;

    std::string render() const;
};

/// Throws ConfigError for an unknown module or an invalid role.
RolePrompt build_prompt(const hierarchy::DesignManifest& manifest, std::string_view module, const RoleConfig& role,
                        const std::vector<FeedbackItem>& prior = {});

/// The line used for one feedback item; stable so it can be searched for.
std::string render_feedback_item(const FeedbackItem& item);

}  // namespace veriloop::orchestrator
