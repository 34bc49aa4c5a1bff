#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace minima {

std::string read_file(const std::filesystem::path& path);

/// Writes through a temporary sibling and renames, so readers never observe a
/// partial file.
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Shortest round-trip decimal (17 significant digits), "nan"/"inf"/"-inf"
/// for non-finite values.
std::string format_double(double v);

/// Parses a complete token with std::from_chars; accepts nan/inf spellings.
bool parse_double(std::string_view token, double& out);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

}  // namespace minima
