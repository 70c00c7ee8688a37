#include "kitamp/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "kitamp/errors.hpp"

namespace kitamp {

namespace {

bool needs_quotes(std::string_view s) {
    return s.find_first_of(",\"\r\n") != std::string_view::npos || (!s.empty() && (s.front() == ' ' || s.back() == ' '));
}

void write_field(std::ostream& out, std::string_view s) {
    if (!needs_quotes(s)) {
        out << s;
        return;
    }
    out << '"';
    for (char c : s) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

}  // namespace

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t k = 0; k < header.size(); ++k)
        if (header[k] == name) return k;
    throw ParseError("missing CSV column '" + std::string(name) + "'", 1);
}

std::vector<double> CsvTable::numeric_column(std::string_view name) const {
    std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (c >= rows[r].size()) throw ParseError("row is missing column '" + std::string(name) + "'", r + 2);
        out.push_back(parse_double(rows[r][c], r + 2));
    }
    return out;
}

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;
    std::size_t record_line = 1;
    char c;
    auto end_field = [&] {
        record.push_back(field);
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        bool blank = record.size() == 1 && record[0].empty();
        if (!blank) {
            if (!records.empty() && record.size() != records.front().size())
                throw ParseError("CSV row has " + std::to_string(record.size()) + " fields, header has " +
                                     std::to_string(records.front().size()),
                                 record_line);
            records.push_back(record);
        }
        record.clear();
    };
    while (in.get(c)) {
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field += '"';
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                if (field_started) throw ParseError("unexpected quote inside unquoted CSV field", line);
                in_quotes = true;
                field_started = true;
                break;
            case ',':
                end_field();
                break;
            case '\r':
                break;
            case '\n':
                end_record();
                ++line;
                record_line = line;
                break;
            default:
                field += c;
                field_started = true;
        }
    }
    if (in_quotes) throw ParseError("unterminated quoted CSV field", line);
    if (!field.empty() || !record.empty()) end_record();
    if (records.empty()) throw ParseError("CSV input has no header row", 1);
    table.header = std::move(records.front());
    table.rows.assign(std::make_move_iterator(records.begin() + 1), std::make_move_iterator(records.end()));
    return table;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return read_csv(in);
}

void write_csv(std::ostream& out, const CsvTable& table) {
    auto row = [&](const std::vector<std::string>& r) {
        for (std::size_t k = 0; k < r.size(); ++k) {
            if (k) out << ',';
            write_field(out, r[k]);
        }
        out << '\n';
    };
    row(table.header);
    for (const auto& r : table.rows) row(r);
}

void write_csv_file(const std::string& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_csv(out, table);
    if (!out) throw IoError("write to '" + path + "' failed");
}

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::size_t line) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
    if (text == "nan") return std::nan("");
    if (text == "inf") return INFINITY;
    if (text == "-inf") return -INFINITY;
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double v = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ParseError("cannot parse number '" + std::string(text) + "'", line);
    return v;
}

}  // namespace kitamp
