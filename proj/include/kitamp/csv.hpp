#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace kitamp {

/// Header row is mandatory; fields are quoted RFC 4180 style when needed.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of `name` in the header, throws ParseError(line 1) if absent.
    std::size_t column(std::string_view name) const;
    /// Column parsed as doubles; bad cells raise ParseError with the line number.
    std::vector<double> numeric_column(std::string_view name) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);
void write_csv(std::ostream& out, const CsvTable& table);
void write_csv_file(const std::string& path, const CsvTable& table);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);
/// Strict full-string parse; throws ParseError with `line` on failure.
double parse_double(std::string_view text, std::size_t line);

}  // namespace kitamp
