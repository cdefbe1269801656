#pragma once

// Internal CSV helpers shared by the feature/score/model file formats.
// Deliberately minimal: fields are comma separated with no quoting, which
// every format written by this project satisfies.

#include <filesystem>
#include <string>
#include <vector>

namespace lesionfuse::csv {

std::vector<std::string> split(const std::string& line);

double parse_double(const std::string& field, const std::string& context);

// Shortest representation that round-trips the double exactly.
std::string format_double(double v);

// Whole file as lines with trailing '\r' stripped. Throws DataError when
// the file cannot be opened.
std::vector<std::string> read_lines(const std::filesystem::path& path);

// Writes via a temp file in the same directory, then renames into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace lesionfuse::csv
