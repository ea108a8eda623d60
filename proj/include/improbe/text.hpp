#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace improbe {

std::string_view trim(std::string_view s) noexcept;
std::string ascii_lower(std::string_view s);

// Splits on ASCII whitespace (space, \t, \n, \r, \f, \v); empty pieces dropped.
std::vector<std::string> split_whitespace(std::string_view s);
std::size_t word_count(std::string_view s) noexcept;

// Number of UTF-8 code points; invalid bytes count as one each.
std::size_t utf8_length(std::string_view s) noexcept;

std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Shortest representation that round-trips through strtod.
std::string format_double(double v);

double parse_double(std::string_view s);
long long parse_int(std::string_view s);

}  // namespace improbe
