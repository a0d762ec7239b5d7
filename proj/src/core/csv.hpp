#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hwenergy::text {

struct CsvRow {
  std::size_t line = 0;  // 1-based line number in the source document
  std::vector<std::string> cells;
};

// RFC 4180 subset: comma separator, double-quote quoting, CRLF tolerated.
// Blank lines and lines starting with '#' are skipped.
std::vector<CsvRow> parse_csv(std::string_view document);

// Quotes a cell only when it contains a separator, quote or newline.
std::string csv_escape(std::string_view cell);

std::string_view trim(std::string_view s) noexcept;
std::vector<std::string_view> split_whitespace(std::string_view s);
std::vector<std::string_view> split_lines(std::string_view s);

std::optional<std::uint64_t> parse_u64(std::string_view s) noexcept;
std::optional<std::int64_t> parse_i64(std::string_view s) noexcept;
std::optional<double> parse_double(std::string_view s) noexcept;

// Shortest representation that parses back to the identical double.
std::string format_double(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace hwenergy::text
