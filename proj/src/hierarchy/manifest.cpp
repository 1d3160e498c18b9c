// SPDX-License-Identifier: Apache-2.0
#include "veriloop/hierarchy/manifest.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace veriloop::hierarchy {

using nlohmann::json;

const PortSpec* ModuleSpec::find_port(std::string_view n) const {
    for (const auto& p : ports)
        if (p.name == n) return &p;
    return nullptr;
}

const ModuleSpec* DesignManifest::find(std::string_view n) const {
    for (const auto& m : modules)
        if (m.name == n) return &m;
    return nullptr;
}

std::vector<std::string> DesignManifest::topological_order() const {
    std::vector<std::string> order;
    std::set<std::string> done;
    std::function<void(const ModuleSpec&)> visit = [&](const ModuleSpec& m) {
        if (!done.insert(m.name).second) return;
        for (const auto& c : m.children)
            if (const ModuleSpec* child = find(c.module)) visit(*child);
        order.push_back(m.name);
    };
    if (const ModuleSpec* t = find(top)) visit(*t);
    for (const auto& m : modules) visit(m);
    return order;
}

namespace {

std::pair<size_t, size_t> line_col(std::string_view text, size_t byte) {
    size_t line = 1, col = 1;
    for (size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

[[noreturn]] void fail(const std::string& msg) { throw ManifestError("invalid manifest: " + msg); }

const json& field(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) fail(where + " must be an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(where + " is missing \"" + key + "\"");
    return *it;
}

std::string string_field(const json& obj, const char* key, const std::string& where) {
    const json& v = field(obj, key, where);
    if (!v.is_string() || v.get<std::string>().empty()) fail(where + "." + key + " must be a non-empty string");
    return v.get<std::string>();
}

frontend::Direction parse_direction(const std::string& s, const std::string& where) {
    if (s == "input" || s == "in") return frontend::Direction::Input;
    if (s == "output" || s == "out") return frontend::Direction::Output;
    if (s == "inout") return frontend::Direction::Inout;
    fail(where + ".dir must be input, output or inout, got \"" + s + "\"");
}

}  // namespace

DesignManifest load_manifest(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
        std::ostringstream os;
        os << "manifest is not valid JSON at line " << line << ", column " << col << ": " << e.what();
        throw ManifestError(os.str());
    }
    DesignManifest m;
    m.top = string_field(doc, "top", "manifest");
    if (doc.contains("clock")) {
        const json& c = doc["clock"];
        m.clock.name = string_field(c, "name", "clock");
        if (c.contains("frequency_hz") && c["frequency_hz"].is_number()) m.clock.frequency_hz = c["frequency_hz"].get<double>();
    }
    if (doc.contains("reset")) {
        const json& r = doc["reset"];
        m.reset.name = string_field(r, "name", "reset");
        if (r.contains("active")) {
            std::string lvl = r["active"].is_string() ? r["active"].get<std::string>() : "";
            if (lvl != "low" && lvl != "high") fail("reset.active must be \"low\" or \"high\"");
            m.reset.active_low = lvl == "low";
        }
        if (r.contains("async")) {
            if (!r["async"].is_boolean()) fail("reset.async must be a boolean");
            m.reset.async = r["async"].get<bool>();
        }
    }
    const json& mods = field(doc, "modules", "manifest");
    if (!mods.is_array()) fail("modules must be an array");
    for (size_t i = 0; i < mods.size(); ++i) {
        std::string where = "modules[" + std::to_string(i) + "]";
        ModuleSpec spec;
        spec.name = string_field(mods[i], "name", where);
        where = "module '" + spec.name + "'";
        if (mods[i].contains("description") && mods[i]["description"].is_string())
            spec.description = mods[i]["description"].get<std::string>();
        if (mods[i].contains("ports")) {
            const json& ports = mods[i]["ports"];
            if (!ports.is_array()) fail(where + " ports must be an array");
            std::set<std::string> seen;
            for (const auto& p : ports) {
                PortSpec ps;
                ps.name = string_field(p, "name", where + " port");
                std::string pw = where + " port '" + ps.name + "'";
                ps.dir = parse_direction(string_field(p, "dir", pw), pw);
                if (p.contains("width")) {
                    if (!p["width"].is_number_unsigned() || p["width"].get<uint64_t>() < 1 ||
                        p["width"].get<uint64_t>() > 64)
                        fail(pw + " width must be an integer in 1..64");
                    ps.width = p["width"].get<uint32_t>();
                }
                if (!seen.insert(ps.name).second) fail("duplicate port '" + ps.name + "' in " + where);
                spec.ports.push_back(std::move(ps));
            }
        }
        if (mods[i].contains("children")) {
            const json& kids = mods[i]["children"];
            if (!kids.is_array()) fail(where + " children must be an array");
            std::set<std::string> seen;
            for (const auto& c : kids) {
                InstanceSpec is;
                is.module = string_field(c, "module", where + " child");
                is.instance = string_field(c, "instance", where + " child");
                if (!seen.insert(is.instance).second)
                    fail("duplicate instance name '" + is.instance + "' in " + where);
                spec.children.push_back(std::move(is));
            }
        }
        if (m.find(spec.name)) fail("duplicate module name '" + spec.name + "'");
        m.modules.push_back(std::move(spec));
    }
    if (!m.find(m.top)) fail("top module '" + m.top + "' is not among the modules");
    for (const auto& spec : m.modules)
        for (const auto& c : spec.children)
            if (!m.find(c.module))
                fail("module '" + spec.name + "' instantiates unknown module '" + c.module + "'");

    // Cycle detection over the instantiation graph.
    std::map<std::string, int> state;  // 1 = on stack, 2 = done
    std::vector<std::string> stack;
    std::function<void(const ModuleSpec&)> dfs = [&](const ModuleSpec& s) {
        state[s.name] = 1;
        stack.push_back(s.name);
        for (const auto& c : s.children) {
            int st = state[c.module];
            if (st == 1) {
                std::string cycle;
                auto it = std::find(stack.begin(), stack.end(), c.module);
                for (; it != stack.end(); ++it) cycle += *it + " -> ";
                fail("instantiation cycle " + cycle + c.module);
            }
            if (st == 0) dfs(*m.find(c.module));
        }
        stack.pop_back();
        state[s.name] = 2;
    };
    for (const auto& s : m.modules)
        if (state[s.name] == 0) dfs(s);
    return m;
}

DesignManifest load_manifest_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read manifest " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_manifest(ss.str());
}

}  // namespace veriloop::hierarchy
