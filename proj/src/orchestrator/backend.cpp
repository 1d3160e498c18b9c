// SPDX-License-Identifier: Apache-2.0
#include "veriloop/orchestrator/backend.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>

#include "veriloop/orchestrator/prompt.hpp"

namespace veriloop::orchestrator {

void BackendSpec::validate() const {
    if (kind == Kind::Mock && script.empty()) throw ConfigError("mock backend needs at least one scripted response");
    if (kind == Kind::Command && command.empty()) throw ConfigError("command backend needs a command");
    if (!(timeout_s > 0)) throw ConfigError("backend timeout must be positive");
}

namespace {

class MockBackend : public Backend {
public:
    explicit MockBackend(std::vector<std::string> script) : script_(std::move(script)) {}

    BackendReply generate(const BackendRequest&) override {
        if (next_ >= script_.size()) return {false, {}, "mock script exhausted"};
        return {true, script_[next_++], {}};
    }

private:
    std::vector<std::string> script_;
    size_t next_ = 0;
};

class CommandBackend : public Backend {
public:
    CommandBackend(std::string command, double timeout) : command_(std::move(command)), timeout_(timeout) {}

    BackendReply generate(const BackendRequest& request) override { return run_command(command_, request, timeout_); }

private:
    std::string command_;
    double timeout_;
};

std::string shell_quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
}

std::string substitute(std::string cmd, const BackendRequest& req) {
    auto replace = [&](const std::string& key, const std::string& value) {
        for (size_t p = cmd.find(key); p != std::string::npos; p = cmd.find(key, p + value.size()))
            cmd.replace(p, key.size(), value);
    };
    replace("{module}", shell_quote(req.module));
    replace("{iteration}", std::to_string(req.iteration));
    return cmd;
}

}  // namespace

std::unique_ptr<Backend> make_backend(const BackendSpec& spec) {
    spec.validate();
    if (spec.kind == BackendSpec::Kind::Mock) return std::make_unique<MockBackend>(spec.script);
    return std::make_unique<CommandBackend>(spec.command, spec.timeout_s);
}

BackendReply run_command(const std::string& command, const BackendRequest& request, double timeout_s) {
    int in_pipe[2], out_pipe[2];
    if (pipe(in_pipe) != 0) return {false, {}, std::string("pipe: ") + std::strerror(errno)};
    if (pipe(out_pipe) != 0) {
        close(in_pipe[0]);
        close(in_pipe[1]);
        return {false, {}, std::string("pipe: ") + std::strerror(errno)};
    }
    std::string cmd = substitute(command, request);
    pid_t pid = fork();
    if (pid < 0) {
        for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
        return {false, {}, std::string("fork: ") + std::strerror(errno)};
    }
    if (pid == 0) {
        setpgid(0, 0);
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
        execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    setpgid(pid, pid);
    close(in_pipe[0]);
    close(out_pipe[1]);
    int to_child = in_pipe[1], from_child = out_pipe[0];
    fcntl(to_child, F_SETFL, fcntl(to_child, F_GETFL) | O_NONBLOCK);
    // A child that exits without reading stdin must not kill us with SIGPIPE.
    struct sigaction ignore {}, previous {};
    ignore.sa_handler = SIG_IGN;
    sigaction(SIGPIPE, &ignore, &previous);

    const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
    std::string out;
    size_t written = 0;
    bool timed_out = false;
    char buf[65536];
    while (from_child >= 0) {
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
            timed_out = true;
            break;
        }
        pollfd fds[2];
        nfds_t n = 0;
        fds[n++] = {from_child, POLLIN, 0};
        if (to_child >= 0) fds[n++] = {to_child, POLLOUT, 0};
        int r = poll(fds, n, static_cast<int>(std::min<long long>(left.count(), 1000)));
        if (r < 0 && errno != EINTR) break;
        if (r <= 0) continue;
        if (n == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
            ssize_t w = write(to_child, request.prompt.data() + written, request.prompt.size() - written);
            if (w > 0) written += static_cast<size_t>(w);
            if (w < 0 && errno != EAGAIN) written = request.prompt.size();
            if (written >= request.prompt.size()) {
                close(to_child);
                to_child = -1;
            }
        }
        if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
            ssize_t got = read(from_child, buf, sizeof buf);
            if (got > 0) {
                out.append(buf, static_cast<size_t>(got));
            } else if (got == 0 || errno != EAGAIN) {
                close(from_child);
                from_child = -1;
            }
        }
    }
    if (to_child >= 0) close(to_child);
    if (from_child >= 0) close(from_child);
    int status = 0;
    // The child may close stdout and keep running; the deadline still applies.
    while (!timed_out) {
        pid_t done = waitpid(pid, &status, WNOHANG);
        if (done == pid || (done < 0 && errno != EINTR)) break;
        if (std::chrono::steady_clock::now() >= deadline) {
            timed_out = true;
            break;
        }
        usleep(5000);
    }
    if (timed_out) {
        kill(-pid, SIGKILL);
        while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
        }
    }
    sigaction(SIGPIPE, &previous, nullptr);

    if (timed_out) return {false, out, "backend timed out after " + std::to_string(timeout_s) + " s"};
    if (WIFSIGNALED(status)) return {false, out, "backend killed by signal " + std::to_string(WTERMSIG(status))};
    if (WEXITSTATUS(status) != 0)
        return {false, out, "backend exited with status " + std::to_string(WEXITSTATUS(status))};
    return {true, out, {}};
}

}  // namespace veriloop::orchestrator
