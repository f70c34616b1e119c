#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ribmorph::csv {

/// Shortest round-trip decimal representation.
std::string format_double(double value);

/// Fixed-point with `decimals` digits, as used in the report tables.
std::string format_fixed(double value, int decimals);

/// Comma split without quoting; fields are trimmed of surrounding whitespace.
std::vector<std::string> split_line(std::string_view line);

double parse_double(std::string_view field);
long long parse_int(std::string_view field);

}  // namespace ribmorph::csv
