#include "kitamp/touchstone.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "kitamp/errors.hpp"
#include "kitamp/units.hpp"

namespace kitamp {

namespace {

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

// Order in which the (row, col) entries appear in a v1 data record.
std::vector<std::pair<Eigen::Index, Eigen::Index>> entry_order(std::size_t n) {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> order;
    const auto ni = static_cast<Eigen::Index>(n);
    if (n == 2) return {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    for (Eigen::Index r = 0; r < ni; ++r)
        for (Eigen::Index c = 0; c < ni; ++c) order.emplace_back(r, c);
    return order;
}

}  // namespace

void write_touchstone(std::ostream& out, const NPortSParams& s, const std::vector<std::string>& comments) {
    for (const auto& c : comments) out << "! " << c << '\n';
    out << "# Hz S RI R " << format_double(s.reference_impedance) << '\n';
    const auto order = entry_order(s.n_ports);
    for (std::size_t k = 0; k < s.matrix.size(); ++k) {
        out << format_double(s.grid[k]);
        std::size_t on_line = 0;
        for (std::size_t e = 0; e < order.size(); ++e) {
            if (s.n_ports > 2 && e > 0 && (e % s.n_ports == 0 || on_line == 4)) {
                out << '\n';
                on_line = 0;
            }
            cdouble v = s.matrix[k](order[e].first, order[e].second);
            out << ' ' << format_double(v.real()) << ' ' << format_double(v.imag());
            ++on_line;
        }
        out << '\n';
    }
}

void write_touchstone_file(const std::string& path, const NPortSParams& s, const std::vector<std::string>& comments) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_touchstone(out, s, comments);
    if (!out) throw IoError("write to '" + path + "' failed");
}

NPortSParams read_touchstone(std::istream& in, std::size_t n_ports) {
    if (n_ports == 0) throw ParseError("touchstone: port count must be >= 1", 0);
    double unit = 1e9;  // v1 default is GHz
    std::string format = "MA";
    double z_ref = 50.0;
    bool saw_options = false;

    std::vector<double> values;
    std::vector<std::size_t> value_lines;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto bang = line.find('!'); bang != std::string::npos) line.erase(bang);
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;
        if (tok[0] == '#') {
            if (saw_options) throw ParseError("touchstone: repeated option line", lineno);
            saw_options = true;
            std::vector<std::string> opts;
            if (tok.size() > 1) opts.push_back(upper(tok.substr(1)));
            while (ls >> tok) opts.push_back(upper(tok));
            for (std::size_t k = 0; k < opts.size(); ++k) {
                const auto& o = opts[k];
                if (o == "HZ") unit = 1.0;
                else if (o == "KHZ") unit = 1e3;
                else if (o == "MHZ") unit = 1e6;
                else if (o == "GHZ") unit = 1e9;
                else if (o == "RI" || o == "MA" || o == "DB") format = o;
                else if (o == "S") continue;
                else if (o == "Y" || o == "Z" || o == "G" || o == "H")
                    throw ParseError("touchstone: only S parameters are supported", lineno);
                else if (o == "R") {
                    if (k + 1 >= opts.size()) throw ParseError("touchstone: R without impedance", lineno);
                    z_ref = parse_double(opts[++k], lineno);
                } else {
                    throw ParseError("touchstone: unknown option '" + o + "'", lineno);
                }
            }
            continue;
        }
        if (tok[0] == '[') throw ParseError("touchstone: v2 keywords are not supported", lineno);
        do {
            values.push_back(parse_double(tok, lineno));
            value_lines.push_back(lineno);
        } while (ls >> tok);
    }

    const std::size_t per_record = 1 + 2 * n_ports * n_ports;
    if (values.size() % per_record != 0) {
        std::size_t at = value_lines.empty() ? lineno : value_lines.back();
        throw ParseError("touchstone: data count " + std::to_string(values.size()) + " is not a multiple of " +
                             std::to_string(per_record) + " for a " + std::to_string(n_ports) + "-port file",
                         at);
    }
    NPortSParams s;
    s.n_ports = n_ports;
    s.reference_impedance = z_ref;
    const auto order = entry_order(n_ports);
    const auto n = static_cast<Eigen::Index>(n_ports);
    for (std::size_t base = 0; base < values.size(); base += per_record) {
        double f = values[base] * unit;
        if (!s.grid.points.empty() && !(f > s.grid.points.back()))
            throw ParseError("touchstone: frequencies must increase", value_lines[base]);
        s.grid.points.push_back(f);
        Eigen::MatrixXcd m(n, n);
        for (std::size_t e = 0; e < order.size(); ++e) {
            double a = values[base + 1 + 2 * e];
            double b = values[base + 2 + 2 * e];
            cdouble v;
            if (format == "RI") v = {a, b};
            else if (format == "MA") v = std::polar(a, b * constants::pi / 180.0);
            else v = std::polar(std::pow(10.0, a / 20.0), b * constants::pi / 180.0);
            m(order[e].first, order[e].second) = v;
        }
        s.matrix.push_back(std::move(m));
    }
    return s;
}

NPortSParams read_touchstone_file(const std::string& path) {
    auto dot = path.rfind('.');
    std::size_t n = 0;
    if (dot != std::string::npos && dot + 3 < path.size() + 1) {
        std::string ext = upper(path.substr(dot + 1));
        if (ext.size() >= 3 && ext.front() == 'S' && ext.back() == 'P') {
            try {
                n = std::stoul(ext.substr(1, ext.size() - 2));
            } catch (...) {
                n = 0;
            }
        }
    }
    if (n == 0) throw IoError("cannot infer port count from file name '" + path + "'");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return read_touchstone(in, n);
}

CsvTable sparams_to_csv(const NPortSParams& s) {
    CsvTable t;
    t.header.push_back("frequency_hz");
    const auto n = static_cast<Eigen::Index>(s.n_ports);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) {
            std::string base = "S" + std::to_string(r + 1) + std::to_string(c + 1);
            t.header.push_back(base + "_re");
            t.header.push_back(base + "_im");
        }
    for (std::size_t k = 0; k < s.matrix.size(); ++k) {
        std::vector<std::string> row{format_double(s.grid[k])};
        for (Eigen::Index r = 0; r < n; ++r)
            for (Eigen::Index c = 0; c < n; ++c) {
                row.push_back(format_double(s.matrix[k](r, c).real()));
                row.push_back(format_double(s.matrix[k](r, c).imag()));
            }
        t.rows.push_back(std::move(row));
    }
    return t;
}

NPortSParams sparams_from_csv(const CsvTable& table, double z_ref) {
    const std::size_t cols = table.header.size();
    if (cols < 3 || (cols - 1) % 2 != 0) throw ParseError("S-parameter CSV: unexpected column count", 1);
    const std::size_t entries = (cols - 1) / 2;
    const auto n = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(entries))));
    if (n * n != entries) throw ParseError("S-parameter CSV: column count is not a square port matrix", 1);
    NPortSParams s;
    s.n_ports = n;
    s.reference_impedance = z_ref;
    s.grid.points = table.numeric_column("frequency_hz");
    const auto ni = static_cast<Eigen::Index>(n);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        Eigen::MatrixXcd m(ni, ni);
        for (Eigen::Index i = 0; i < ni; ++i)
            for (Eigen::Index j = 0; j < ni; ++j) {
                std::string base = "S" + std::to_string(i + 1) + std::to_string(j + 1);
                std::size_t cre = table.column(base + "_re");
                std::size_t cim = table.column(base + "_im");
                m(i, j) = {parse_double(table.rows[r][cre], r + 2), parse_double(table.rows[r][cim], r + 2)};
            }
        s.matrix.push_back(std::move(m));
    }
    s.grid.validate();
    return s;
}

}  // namespace kitamp
