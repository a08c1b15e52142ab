#pragma once

#include <string>
#include <string_view>

namespace gridshaper {

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

// Strict parse of a whole field; throws std::invalid_argument naming `what`.
double parse_double(std::string_view text, std::string_view what);
long long parse_integer(std::string_view text, std::string_view what);

}  // namespace gridshaper
