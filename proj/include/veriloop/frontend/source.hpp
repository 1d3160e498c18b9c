// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace veriloop {

struct SourceFile {
    std::string name;
    std::string text;
};

/// Owns the text of every file in one analysis run. File ids are indices.
class SourceManager {
public:
    uint32_t add(std::string name, std::string text);

    /// Throws std::runtime_error when the file cannot be read.
    uint32_t load(const std::filesystem::path& path);

    const SourceFile& file(uint32_t id) const { return files_.at(id); }
    const std::string& name(uint32_t id) const { return files_.at(id).name; }
    size_t size() const { return files_.size(); }

private:
    std::vector<SourceFile> files_;
};

}  // namespace veriloop
