#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace promptforge::text {

std::string_view trim_view(std::string_view s);
std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool icontains(std::string_view haystack, std::string_view needle);

/// Splits on '\n', dropping a trailing '\r' from each line.
std::vector<std::string> split_lines(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Whitespace-separated word count; the mock provider's token estimate.
std::size_t word_count(std::string_view s);

}  // namespace promptforge::text
