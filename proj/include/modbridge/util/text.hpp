#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mb {

std::string trim(std::string_view s);
// Trims and replaces every whitespace run with one space.
std::string collapse_whitespace(std::string_view s);
std::string to_lower(std::string_view s);
bool starts_with_ci(std::string_view s, std::string_view prefix);
std::vector<std::string> split_words(std::string_view s);

}  // namespace mb
