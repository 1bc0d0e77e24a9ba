#pragma once

#include <filesystem>
#include <string>

namespace mgadn {

// Writes to a sibling temporary file and renames it over `path`, so a
// failed write never leaves a partial file behind.
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

// Shortest decimal form that parses back to the same double.
std::string format_number(double v);

}  // namespace mgadn
