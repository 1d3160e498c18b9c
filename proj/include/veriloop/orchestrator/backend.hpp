// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>
#include <vector>

namespace veriloop::orchestrator {

struct BackendSpec {
    enum class Kind { Mock, Command };
    Kind kind = Kind::Mock;
    std::vector<std::string> script;  // mock responses, consumed in order
    std::string command;              // run with /bin/sh -c; prompt on stdin
    double timeout_s = 120;

    /// Throws ConfigError for an empty script, empty command or bad timeout.
    void validate() const;
};

struct BackendReply {
    bool ok = false;
    std::string text;
    std::string error;
};

struct BackendRequest {
    std::string module;
    int iteration = 1;
    std::string prompt;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual BackendReply generate(const BackendRequest& request) = 0;
};

std::unique_ptr<Backend> make_backend(const BackendSpec& spec);

/// Runs `command` under /bin/sh with `input` on stdin. The child is killed
/// after `timeout_s`. `{module}` and `{iteration}` in the command are
/// replaced by shell-quoted values from the request.
BackendReply run_command(const std::string& command, const BackendRequest& request, double timeout_s);

}  // namespace veriloop::orchestrator
