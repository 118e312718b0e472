#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace netlasso {

/// A plain rectangular table of already-formatted cells.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv_line(std::string_view line);

void write_csv(std::ostream& out, const Table& table);
void write_csv(const std::filesystem::path& path, const Table& table);

/// Reads a whole CSV file; the first record becomes the header.
/// Blank lines are skipped and a trailing '\r' is stripped.
Table read_csv(const std::filesystem::path& path);

/// Whole-field number parsing; throws std::invalid_argument on empty input
/// or trailing junk.
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

std::string_view trim(std::string_view s);

}  // namespace netlasso
