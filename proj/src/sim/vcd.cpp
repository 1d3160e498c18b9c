// SPDX-License-Identifier: Apache-2.0
#include "veriloop/sim/vcd.hpp"

#include <map>
#include <sstream>
#include <vector>

namespace veriloop::sim {

namespace {

std::string id_code(size_t n) {
    std::string s;
    do {
        s += static_cast<char>('!' + n % 94);
        n /= 94;
    } while (n);
    return s;
}

std::vector<std::string> split_path(const std::string& name) {
    std::vector<std::string> parts;
    size_t start = 0;
    for (;;) {
        size_t dot = name.find('.', start);
        parts.push_back(name.substr(start, dot == std::string::npos ? std::string::npos : dot - start));
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    return parts;
}

void emit_value(std::ostream& os, uint64_t v, uint32_t width, const std::string& code) {
    if (width == 1) {
        os << (v & 1) << code << '\n';
        return;
    }
    os << 'b';
    int top = 63;
    while (top > 0 && !((v >> top) & 1)) --top;
    for (int b = top; b >= 0; --b) os << ((v >> b) & 1);
    os << ' ' << code << '\n';
}

}  // namespace

std::string write_vcd(const Trace& trace, std::string_view top) {
    std::ostringstream os;
    os << "$version veriloop $end\n$timescale 1ns $end\n";
    os << "$scope module " << top << " $end\n";
    std::vector<std::string> scope;  // below top
    std::vector<std::string> codes;
    for (size_t i = 0; i < trace.signals.size(); ++i) {
        const TraceSignal& s = trace.signals[i];
        auto parts = split_path(s.name);
        std::string leaf = parts.back();
        parts.pop_back();
        size_t common = 0;
        while (common < scope.size() && common < parts.size() && scope[common] == parts[common]) ++common;
        while (scope.size() > common) {
            os << "$upscope $end\n";
            scope.pop_back();
        }
        for (size_t k = common; k < parts.size(); ++k) {
            os << "$scope module " << parts[k] << " $end\n";
            scope.push_back(parts[k]);
        }
        codes.push_back(id_code(i));
        os << "$var wire " << s.width << ' ' << codes.back() << ' ' << leaf;
        if (s.width > 1) os << " [" << s.width - 1 << ":0]";
        os << " $end\n";
    }
    while (!scope.empty()) {
        os << "$upscope $end\n";
        scope.pop_back();
    }
    os << "$upscope $end\n$enddefinitions $end\n";
    os << "#0\n$dumpvars\n";
    for (size_t i = 0; i < trace.signals.size(); ++i) {
        const TraceSignal& s = trace.signals[i];
        emit_value(os, s.values.empty() ? 0 : s.values[0], s.width, codes[i]);
    }
    os << "$end\n";
    for (size_t t = 1; t < trace.cycles; ++t) {
        bool stamped = false;
        for (size_t i = 0; i < trace.signals.size(); ++i) {
            const TraceSignal& s = trace.signals[i];
            if (s.values[t] == s.values[t - 1]) continue;
            if (!stamped) {
                os << '#' << t << '\n';
                stamped = true;
            }
            emit_value(os, s.values[t], s.width, codes[i]);
        }
    }
    os << '#' << trace.cycles << '\n';
    return os.str();
}

Trace read_vcd(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::vector<std::string> words;
    {
        std::string w;
        while (in >> w) words.push_back(w);
    }
    Trace tr;
    std::map<std::string, std::vector<size_t>> by_code;
    std::vector<std::string> scope;
    size_t i = 0;
    auto skip_to_end = [&] {
        while (i < words.size() && words[i] != "$end") ++i;
        if (i == words.size()) throw VcdError("unterminated VCD command");
        ++i;
    };
    bool defs_done = false;
    while (i < words.size() && !defs_done) {
        const std::string& w = words[i];
        if (w == "$scope") {
            if (i + 3 >= words.size()) throw VcdError("truncated $scope");
            scope.push_back(words[i + 2]);
            i += 3;
            skip_to_end();
        } else if (w == "$upscope") {
            if (scope.empty()) throw VcdError("unbalanced $upscope");
            scope.pop_back();
            ++i;
            skip_to_end();
        } else if (w == "$var") {
            if (i + 4 >= words.size()) throw VcdError("truncated $var");
            if (words[i + 1] == "real") throw VcdError("real variables are not supported");
            uint32_t width = static_cast<uint32_t>(std::stoul(words[i + 2]));
            if (width == 0 || width > 64) throw VcdError("unsupported variable width " + words[i + 2]);
            const std::string& code = words[i + 3];
            std::string name;
            for (size_t k = 1; k < scope.size(); ++k) name += scope[k] + ".";
            name += words[i + 4];
            by_code[code].push_back(tr.signals.size());
            tr.signals.push_back({name, width, {}});
            i += 5;
            skip_to_end();
        } else if (w == "$enddefinitions") {
            ++i;
            skip_to_end();
            defs_done = true;
        } else if (!w.empty() && w[0] == '$') {
            ++i;
            skip_to_end();
        } else {
            throw VcdError("unexpected token '" + w + "' in VCD header");
        }
    }
    if (!defs_done) throw VcdError("missing $enddefinitions");

    std::vector<uint64_t> current(tr.signals.size(), 0);
    long long time = -1;
    bool changes_at_time = false;
    auto advance_to = [&](long long t) {
        if (t < time) throw VcdError("timestamps go backwards");
        for (long long c = std::max<long long>(time, 0); c < t; ++c)
            for (size_t s = 0; s < tr.signals.size(); ++s) tr.signals[s].values.push_back(current[s]);
        time = t;
        changes_at_time = false;
    };
    auto set = [&](const std::string& code, uint64_t v) {
        auto it = by_code.find(code);
        if (it == by_code.end()) throw VcdError("unknown identifier code '" + code + "'");
        for (size_t s : it->second) current[s] = v & width_mask(tr.signals[s].width);
        changes_at_time = true;
    };
    while (i < words.size()) {
        const std::string& w = words[i];
        if (w[0] == '#') {
            advance_to(std::stoll(w.substr(1)));
            ++i;
        } else if (w == "$dumpvars" || w == "$dumpon" || w == "$dumpoff" || w == "$dumpall" || w == "$end") {
            ++i;
        } else if (w[0] == '$') {
            ++i;
            skip_to_end();
        } else if (w[0] == 'b' || w[0] == 'B') {
            if (i + 1 >= words.size()) throw VcdError("vector value without identifier");
            uint64_t v = 0;
            for (size_t k = 1; k < w.size(); ++k) v = (v << 1) | (w[k] == '1' ? 1 : 0);
            set(words[i + 1], v);
            i += 2;
        } else if (w[0] == 'r' || w[0] == 'R') {
            throw VcdError("real values are not supported");
        } else if (w[0] == '0' || w[0] == '1' || w[0] == 'x' || w[0] == 'X' || w[0] == 'z' || w[0] == 'Z') {
            set(w.substr(1), w[0] == '1' ? 1 : 0);
            ++i;
        } else {
            throw VcdError("unexpected token '" + w + "'");
        }
    }
    if (time < 0) {
        tr.cycles = 0;
        return tr;
    }
    // A final timestamp without changes closes the trace; otherwise the last
    // timestamp is itself a sample.
    long long end = changes_at_time ? time + 1 : time;
    for (long long c = time; c < end; ++c)
        for (size_t s = 0; s < tr.signals.size(); ++s) tr.signals[s].values.push_back(current[s]);
    tr.cycles = static_cast<size_t>(end);
    return tr;
}

}  // namespace veriloop::sim
