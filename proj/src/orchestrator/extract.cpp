// SPDX-License-Identifier: Apache-2.0
#include "veriloop/orchestrator/extract.hpp"

#include <algorithm>
#include <cctype>

namespace veriloop::orchestrator {

namespace {

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }

// Same length as the input, with comments blanked so offsets still line up.
std::string blank_comments(std::string_view text) {
    std::string out(text);
    size_t i = 0;
    while (i < out.size()) {
        if (out.compare(i, 2, "//") == 0) {
            while (i < out.size() && out[i] != '\n') out[i++] = ' ';
        } else if (out.compare(i, 2, "/*") == 0) {
            size_t end = out.find("*/", i + 2);
            end = end == std::string::npos ? out.size() : end + 2;
            for (; i < end; ++i)
                if (out[i] != '\n') out[i] = ' ';
        } else if (out[i] == '"') {
            ++i;
            while (i < out.size() && out[i] != '"' && out[i] != '\n') i += out[i] == '\\' ? 2 : 1;
            ++i;
        } else {
            ++i;
        }
    }
    return out;
}

size_t find_word(const std::string& text, std::string_view word, size_t from) {
    while (true) {
        size_t p = text.find(word, from);
        if (p == std::string::npos) return p;
        bool left = p == 0 || !ident_char(text[p - 1]);
        bool right = p + word.size() >= text.size() || !ident_char(text[p + word.size()]);
        if (left && right) return p;
        from = p + 1;
    }
}

size_t skip_space(const std::string& t, size_t i) {
    while (i < t.size() && std::isspace(static_cast<unsigned char>(t[i]))) ++i;
    return i;
}

struct ModuleSpan {
    size_t begin = 0, end = 0;
    std::string name;
};

// "module NAME" followed by a parameter list, port list or ';'. Prose that
// merely mentions the word does not qualify.
std::vector<ModuleSpan> module_spans(std::string_view raw) {
    std::string t = blank_comments(raw);
    std::vector<ModuleSpan> out;
    size_t from = 0;
    while (true) {
        size_t p = find_word(t, "module", from);
        if (p == std::string::npos) break;
        from = p + 6;
        size_t i = skip_space(t, p + 6);
        size_t n = i;
        while (n < t.size() && ident_char(t[n])) ++n;
        if (n == i || std::isdigit(static_cast<unsigned char>(t[i]))) continue;
        size_t k = skip_space(t, n);
        if (k >= t.size() || (t[k] != '(' && t[k] != '#' && t[k] != ';')) continue;
        size_t e = find_word(t, "endmodule", k);
        ModuleSpan s;
        s.begin = p;
        s.end = e == std::string::npos ? t.size() : e + 9;
        s.name = t.substr(i, n - i);
        out.push_back(s);
        from = s.end;
    }
    return out;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string trim(std::string_view s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string_view::npos) return {};
    size_t b = s.find_last_not_of(" \t\r");
    return std::string(s.substr(a, b - a + 1));
}

}  // namespace

std::vector<std::string> declared_modules(std::string_view text) {
    std::vector<std::string> names;
    for (const auto& s : module_spans(text)) names.push_back(s.name);
    return names;
}

Extraction extract_code(std::string_view response) {
    Extraction ex;
    bool in_fence = false;
    std::string label, body;
    auto close = [&] {
        bool verilog = label == "verilog" || label == "systemverilog" || label == "v" || label == "sv";
        if ((verilog || label.empty()) && !module_spans(body).empty()) ex.units.push_back(body);
        body.clear();
    };
    size_t pos = 0;
    while (pos <= response.size()) {
        size_t nl = response.find('\n', pos);
        std::string_view line = response.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        std::string t = trim(line);
        if (t.rfind("```", 0) == 0) {
            if (in_fence) {
                close();
                in_fence = false;
            } else {
                in_fence = true;
                label = lower(trim(std::string_view(t).substr(3)));
            }
        } else if (in_fence) {
            body.append(line);
            body.push_back('\n');
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    if (in_fence) close();
    if (!ex.units.empty()) return ex;

    for (const auto& s : module_spans(response))
        ex.units.emplace_back(std::string(response.substr(s.begin, s.end - s.begin)) + "\n");
    return ex;
}

}  // namespace veriloop::orchestrator
