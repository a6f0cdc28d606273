#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace agingscope::csv {

// Minimal RFC-4180 style helpers shared by the manifest, capture and report formats.

std::vector<std::string> split_row(std::string_view line);
std::vector<std::string> split_lines(std::string_view text);
std::string escape(std::string_view field);
std::string join_row(const std::vector<std::string>& fields);

std::string trim(std::string_view s);
double parse_double(std::string_view field, std::string_view what);
long long parse_int(std::string_view field, std::string_view what);
/// Shortest representation that round-trips through parse_double.
std::string format_double(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace agingscope::csv
