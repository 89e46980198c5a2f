#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fbmavg {

// Shortest decimal form that parses back to the identical double.
std::string format_double(double x);
double parse_double(std::string_view s);

std::vector<std::string_view> split_csv_line(std::string_view line);

}  // namespace fbmavg
