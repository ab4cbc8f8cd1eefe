#pragma once

#include <string>
#include <vector>

namespace trapsim {

// Shortest-exact decimal form of a double ("%.17g"); round-trips bit-exactly
// through strtod, which is what the byte-identical rerun guarantee rests on.
std::string fmt17(double v);

void ensure_dir(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);
bool file_exists(const std::string& path);

// Split on a delimiter, trimming ASCII whitespace from each piece.
std::vector<std::string> split_trimmed(const std::string& text, char delim);
std::string trim(const std::string& text);

}  // namespace trapsim
