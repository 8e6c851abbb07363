#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace swifeed::csv {

/// Shortest decimal text that parses back to exactly the same double.
std::string format_number(double value);

std::optional<double> parse_number(std::string_view text);
std::optional<std::int64_t> parse_integer(std::string_view text);

/// Quotes a field only when it contains a separator, quote or newline.
std::string escape(std::string_view field);

std::vector<std::string> split_line(std::string_view line);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;

    /// Index of a named column, or nullopt.
    std::optional<std::size_t> column(std::string_view name) const;
};

/// Reads a header row followed by data rows. Blank lines are skipped;
/// a row with the wrong field count is a SchemaMismatch error.
Table read_table(std::istream& in, std::string_view source);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace swifeed::csv
