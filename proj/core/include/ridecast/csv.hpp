#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ridecast::csv {

// Minimal RFC-4180 table: header row plus string cells.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of `name` in the header, or nullopt.
  std::optional<std::size_t> column(std::string_view name) const;
  std::size_t require_column(std::string_view name) const;
};

Table parse(std::string_view text);
Table read_file(const std::filesystem::path& path);

std::string escape(std::string_view cell);
std::string join_row(const std::vector<std::string>& cells);

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);
std::optional<double> parse_double(std::string_view cell);

/// Write through a sibling temp file and rename into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_text(const std::filesystem::path& path);

}  // namespace ridecast::csv
