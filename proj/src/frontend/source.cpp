// SPDX-License-Identifier: Apache-2.0
#include "veriloop/frontend/source.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace veriloop {

uint32_t SourceManager::add(std::string name, std::string text) {
    files_.push_back({std::move(name), std::move(text)});
    return static_cast<uint32_t>(files_.size() - 1);
}

uint32_t SourceManager::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return add(path.string(), buf.str());
}

}  // namespace veriloop
