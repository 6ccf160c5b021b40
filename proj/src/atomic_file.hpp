#pragma once

#include <filesystem>
#include <fstream>
#include <system_error>

#include "reldisc/error.hpp"

namespace reldisc::detail {

/// Writes through `fill` into a sibling temp file, then renames it over
/// `path`, so readers never observe a half-written file.
template <typename Fill>
void write_atomically(const std::filesystem::path& path, Fill&& fill) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        fill(out);
        out.flush();
        if (!out) throw IoError("failed writing " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move " + tmp.string() + " to " + path.string());
    }
}

}  // namespace reldisc::detail
