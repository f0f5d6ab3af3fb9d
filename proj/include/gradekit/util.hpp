#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gradekit {

std::string sha256_hex(std::string_view data);

std::string read_file(const std::filesystem::path& path);
// Writes via a temp file in the same directory followed by rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// UTC timestamp, e.g. "2025-01-31T14:02:55Z".
std::string iso8601_now();

std::string trim(std::string_view s);
std::string to_upper(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split_lines(std::string_view text);

// Shortest decimal text that round-trips the double (std::to_chars).
std::string shortest_double(double v);

}  // namespace gradekit
