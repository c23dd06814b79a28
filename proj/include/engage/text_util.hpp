#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace engage {

std::string to_lower_ascii(std::string_view s);
std::string_view trim(std::string_view s);

// Number of Unicode scalar values; invalid lead bytes count as one each.
std::size_t utf8_length(std::string_view s);

// Fraction of bytes below 0x80; 1.0 for empty input.
double ascii_ratio(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

// Shortest round-trippable decimal form of a double ("inf"/"nan" for
// non-finite values). All CSV writers go through this so outputs are
// byte-stable.
std::string format_double(double v);

}  // namespace engage
