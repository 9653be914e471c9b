#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace genboost {

// Shortest decimal string that parses back to exactly `value`.
std::string format_real(double value);

// Whole-string decimal parse with optional sign and exponent; nullopt on
// any trailing garbage. Non-finite spellings ("nan", "inf") are parsed and
// left to callers to reject.
std::optional<double> parse_real(std::string_view text);

std::vector<std::string> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

} // namespace genboost
