#pragma once

#include <charconv>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "uas/error.hpp"

namespace uas {

/// Shortest representation that parses back to the same double.
std::string format_shortest(double v);
/// Fixed 7 decimals, the precision of emitted coordinates (about 1 cm).
std::string format_coord(double v);

/// Fields of one CSV line. Values never contain commas or quotes here.
std::vector<std::string_view> split_fields(std::string_view line);

template <typename T>
T parse_number(std::string_view text, std::string_view what) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw DataIntegrityError(std::string(what) + ": bad number '" + std::string(text) + "'");
  }
  return value;
}

std::string read_file(const std::filesystem::path& path);
/// Writes via a temporary file in the same directory, then renames.
void write_file(const std::filesystem::path& path, std::string_view content);
void for_each_file_line(const std::filesystem::path& path, const std::function<void(std::string_view)>& on_line);

}  // namespace uas
