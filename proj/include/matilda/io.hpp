#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace matilda {

// Reads all lines of a text file. A trailing newline does not produce an
// extra empty line; '\r' before '\n' is stripped.
std::vector<std::string> read_lines(const std::filesystem::path& path);
std::vector<std::string> read_lines(std::istream& in);

// Writes through a sibling temporary file and renames it over `path` once the
// writer returns, so readers never observe a partially written output.
void write_file_atomically(const std::filesystem::path& path,
                           const std::function<void(std::ostream&)>& writer);

}  // namespace matilda
