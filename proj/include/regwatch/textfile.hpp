#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace regwatch {

// Shared helpers for the line-oriented data files (lexicons, gazetteers,
// taxonomies): UTF-8, one entry per line, '#' starts a comment.

std::string read_file(const std::string& path);

// Lines with comments stripped, trimmed, blanks dropped.
std::vector<std::string> read_data_lines(const std::string& path);
std::vector<std::string> data_lines_from_text(std::string_view text);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

// Atomic write: temp file in the same directory, then rename.
void write_file_atomic(const std::string& path, std::string_view content);

}  // namespace regwatch
