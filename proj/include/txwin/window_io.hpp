#pragma once

#include "txwin/core_model.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace txwin
{
    // Line-oriented window format:
    //
    //   # comment                   (anywhere; blank lines ignored)
    //   window M N                  (first non-comment line)
    //   objects s                   (optional, at most once, access files only)
    //   edge i1 j1 i2 j2            (edge-list files)
    //   access i j [R:o1,o2,...] [W:o3,...]   (access-set files)
    //
    // A file holds either edge lines or access lines, never both. Transactions with
    // no access line have empty access sets. Errors name the offending line.
    WindowSpec read_window(std::istream &in);
    void write_window(std::ostream &out, const WindowSpec &window);

    WindowSpec load_window(const std::filesystem::path &path);
    void save_window(const std::filesystem::path &path, const WindowSpec &window);
} // namespace txwin
