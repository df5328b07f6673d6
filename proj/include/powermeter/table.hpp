#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace powermeter {

/// Ordered rows of string cells under a fixed column set. An empty cell is a
/// missing value.
struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t column_index(std::string_view name) const;  // npos if absent
    const std::string& at(std::size_t row, std::string_view column) const;

    std::string to_csv() const;
    /// Space-aligned, one header line.
    std::string to_text() const;
    void write_csv(const std::filesystem::path& path) const;
};

namespace csv {

std::string escape(std::string_view field);
std::string join(const std::vector<std::string>& fields);
/// Splits one CSV record; handles double-quoted fields. Throws ParseError on
/// an unterminated quote.
std::vector<std::string> split(std::string_view line);

/// Shortest decimal that round-trips to the same double.
std::string format_shortest(double v);
/// 17 significant digits; always round-trips.
std::string format17(double v);
/// Throws ParseError when the whole string is not a number.
double parse_double(std::string_view s);

} // namespace csv

} // namespace powermeter
