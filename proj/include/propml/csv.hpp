#pragma once

#include <optional>
#include <string>
#include <vector>

namespace propml {
namespace csv {

// Minimal RFC-4180 CSV: quoted fields with embedded commas/quotes/newlines
// are supported on read; fields are quoted on write only when needed.

std::vector<std::string> split_line(const std::string& line);

// Reads all records. Handles quoted newlines, skips a trailing empty line.
std::vector<std::vector<std::string>> read_file(const std::string& path);

std::string escape(const std::string& field);
std::string join(const std::vector<std::string>& fields);

// Shortest representation that round-trips exactly (std::to_chars).
std::string format_double(double v);
std::string format_int(long long v);

std::optional<double> parse_double(const std::string& s);
std::optional<long long> parse_int(const std::string& s);
std::optional<bool> parse_bool(const std::string& s);

std::string trim(const std::string& s);

}  // namespace csv
}  // namespace propml
