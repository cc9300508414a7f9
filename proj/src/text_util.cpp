#include "text_util.hpp"

#include <charconv>

#include "temporalot/error.hpp"

namespace temporalot::detail {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::string_view key_value(std::string_view field, std::string_view key,
                           std::string_view source) {
  if (field.size() <= key.size() || field.substr(0, key.size()) != key ||
      field[key.size()] != '=') {
    throw ParseError(std::string(source) + ": expected '" + std::string(key) + "=<value>', got '" +
                     std::string(field) + "'");
  }
  return field.substr(key.size() + 1);
}

long parse_key_int(std::string_view field, std::string_view key, std::string_view source,
                   long min_value) {
  std::string_view text = key_value(field, key, source);
  long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError(std::string(source) + ": invalid integer for '" + std::string(key) + "'");
  }
  if (value < min_value) {
    throw ParseError(std::string(source) + ": '" + std::string(key) + "' must be >= " +
                     std::to_string(min_value));
  }
  return value;
}

}  // namespace temporalot::detail
