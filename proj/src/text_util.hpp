#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace temporalot::detail {

// Splits on '\n', dropping a trailing '\r' per line and a final empty line.
std::vector<std::string_view> split_lines(std::string_view text);

std::vector<std::string_view> split_ws(std::string_view line);

std::string_view trim(std::string_view s);

// Parses `key=<integer>` and checks the value is >= min_value.
long parse_key_int(std::string_view field, std::string_view key, std::string_view source,
                   long min_value);

// Parses `key=<value>` and returns the value text.
std::string_view key_value(std::string_view field, std::string_view key,
                           std::string_view source);

}  // namespace temporalot::detail
