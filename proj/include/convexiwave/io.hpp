#pragma once

#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "convexiwave/errors.hpp"
#include "convexiwave/grid.hpp"

namespace convexiwave::io {

// Field CSV: "# grid x_min x_max t_max nx nt", then one line per x-node.

inline void write_field(std::ostream& os, const Field2D& f) {
    const auto& g = f.grid();
    os << std::setprecision(17);
    os << "# grid " << g.x_min() << ' ' << g.x_max() << ' ' << g.t_max() << ' ' << g.nx() << ' ' << g.nt()
       << '\n';
    for (std::size_t i = 0; i < g.x_nodes(); ++i) {
        auto row = f.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) os << ',';
            os << row[j];
        }
        os << '\n';
    }
}

namespace detail {

inline std::vector<double> split_numbers(const std::string& line, char sep) {
    std::vector<double> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, sep)) {
        if (cell.empty()) continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(cell, &used);
        } catch (const std::exception&) {
            throw Error(ErrorKind::Io, "not a number: '" + cell + "'");
        }
        out.push_back(v);
    }
    return out;
}

inline bool is_comment_or_header(const std::string& line) {
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos) return true;
    const char c = line[pos];
    return !(std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.');
}

}  // namespace detail

inline Field2D read_field(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw Error(ErrorKind::Io, "empty field file");
    std::istringstream header(line);
    std::string hash, tag;
    double x_min = 0, x_max = 0, t_max = 0;
    std::size_t nx = 0, nt = 0;
    header >> hash >> tag >> x_min >> x_max >> t_max >> nx >> nt;
    if (hash != "#" || tag != "grid" || !header) throw Error(ErrorKind::Io, "missing '# grid' header");
    SpaceTimeGrid g(x_min, x_max, t_max, nx, nt);
    std::vector<double> values;
    values.reserve(g.size());
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        if (detail::is_comment_or_header(line)) continue;
        auto row = detail::split_numbers(line, ',');
        if (row.size() != g.t_nodes()) throw Error(ErrorKind::Io, "field row has wrong length");
        values.insert(values.end(), row.begin(), row.end());
        ++rows;
    }
    if (rows != g.x_nodes()) throw Error(ErrorKind::Io, "field has wrong number of rows");
    return Field2D(g, std::move(values));
}

inline void write_signal(std::ostream& os, const Signal& s) {
    os << std::setprecision(17) << "t,value\n";
    for (std::size_t k = 0; k < s.size(); ++k) os << s.time(k) << ',' << s[k] << '\n';
}

/// Reads two-column "t,value" data; the time column must be uniformly spaced.
inline Signal read_signal(std::istream& is) {
    std::string line;
    std::vector<double> t, v;
    while (std::getline(is, line)) {
        if (detail::is_comment_or_header(line)) continue;
        auto row = detail::split_numbers(line, ',');
        if (row.size() != 2) throw Error(ErrorKind::Io, "signal rows need exactly two columns");
        t.push_back(row[0]);
        v.push_back(row[1]);
    }
    if (v.empty()) throw Error(ErrorKind::Io, "signal file has no samples");
    if (v.size() == 1) return Signal(t[0], 1.0, std::move(v));
    const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    for (std::size_t k = 1; k < t.size(); ++k) {
        if (std::abs((t[k] - t[k - 1]) - dt) > 1e-6 * std::max(1.0, std::abs(dt)))
            throw Error(ErrorKind::Io, "signal time column is not uniform");
    }
    return Signal(t.front(), dt, std::move(v));
}

template <typename Writer, typename Value>
void write_file(const std::string& path, Writer&& writer, const Value& value) {
    std::ofstream os(path);
    if (!os) throw Error(ErrorKind::Io, "cannot open for writing: " + path);
    writer(os, value);
    if (!os) throw Error(ErrorKind::Io, "write failed: " + path);
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorKind::Io, "cannot open: " + path);
    return is;
}

inline Field2D read_field_file(const std::string& path) {
    auto is = open_input(path);
    return read_field(is);
}

inline Signal read_signal_file(const std::string& path) {
    auto is = open_input(path);
    return read_signal(is);
}

inline void write_field_file(const std::string& path, const Field2D& f) {
    write_file(path, [](std::ostream& os, const Field2D& v) { write_field(os, v); }, f);
}

inline void write_signal_file(const std::string& path, const Signal& s) {
    write_file(path, [](std::ostream& os, const Signal& v) { write_signal(os, v); }, s);
}

/// Equal-length columns under a comma-separated header.
inline void write_table(const std::string& path, const std::vector<std::string>& names,
                        const std::vector<std::vector<double>>& columns) {
    require(names.size() == columns.size() && !columns.empty(), "table needs one name per column");
    for (const auto& c : columns) require(c.size() == columns.front().size(), "table columns differ in length");
    std::ofstream os(path);
    if (!os) throw Error(ErrorKind::Io, "cannot open for writing: " + path);
    os << std::setprecision(12);
    for (std::size_t k = 0; k < names.size(); ++k) os << (k ? "," : "") << names[k];
    os << '\n';
    for (std::size_t r = 0; r < columns.front().size(); ++r) {
        for (std::size_t k = 0; k < columns.size(); ++k) os << (k ? "," : "") << columns[k][r];
        os << '\n';
    }
    if (!os) throw Error(ErrorKind::Io, "write failed: " + path);
}

}  // namespace convexiwave::io
