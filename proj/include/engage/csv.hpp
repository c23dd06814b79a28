#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace engage {

// Quotes a field when it contains a comma, quote, or line break.
std::string csv_escape(std::string_view field);

std::vector<std::string> parse_csv_line(std::string_view line);

double parse_double(std::string_view s);

}  // namespace engage
