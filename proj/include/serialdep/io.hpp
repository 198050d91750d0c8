#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "serialdep/types.hpp"

namespace serialdep {

/// Malformed or unusable input data (as opposed to a caller mistake).
class data_error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

struct ReadOptions {
    bool log = false;   // natural log, applied first
    bool diff = false;  // first difference, applied second
};

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

inline bool parse_number(std::string_view cell, double& out) {
    if (cell.empty()) return false;
    if (cell.front() == '+') cell.remove_prefix(1);
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), out);
    return res.ec == std::errc() && res.ptr == cell.data() + cell.size();
}

inline std::string unquote(std::string_view cell) {
    if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') cell = cell.substr(1, cell.size() - 2);
    return std::string(cell);
}

}  // namespace detail

/// Parses CSV text: one column per component, an optional header row, no missing cells.
inline MultiSeries parse_series(std::string_view text, const ReadOptions& options = {}) {
    if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
    std::vector<std::string> labels;
    std::vector<std::vector<double>> rows;
    std::size_t width = 0;
    std::size_t line_no = 0;
    bool first = true;
    while (!text.empty()) {
        const std::size_t nl = text.find('\n');
        const std::string_view line = detail::trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        std::vector<double> values(cells.size());
        bool numeric = true;
        for (std::size_t k = 0; k < cells.size(); ++k) numeric = numeric && detail::parse_number(cells[k], values[k]);
        if (first) {
            width = cells.size();
            first = false;
            if (!numeric) {
                for (auto c : cells) labels.push_back(detail::unquote(c));
                continue;
            }
        }
        if (cells.size() != width) {
            throw data_error("line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                             " columns, found " + std::to_string(cells.size()));
        }
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (cells[k].empty()) throw data_error("line " + std::to_string(line_no) + ": missing value");
            double v = 0;
            if (!detail::parse_number(cells[k], v) || !std::isfinite(v)) {
                throw data_error("line " + std::to_string(line_no) + ": not a finite number: '" +
                                 std::string(cells[k]) + "'");
            }
            values[k] = v;
        }
        rows.push_back(std::move(values));
    }
    if (options.log) {
        for (auto& row : rows) {
            for (double& v : row) {
                if (!(v > 0.0)) throw data_error("log transform needs positive values");
                v = std::log(v);
            }
        }
    }
    if (options.diff && !rows.empty()) {
        for (std::size_t t = rows.size() - 1; t > 0; --t) {
            for (std::size_t k = 0; k < width; ++k) rows[t][k] -= rows[t - 1][k];
        }
        rows.erase(rows.begin());
    }
    if (rows.size() < 2) throw data_error("need at least 2 usable rows");
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t t = 0; t < rows.size(); ++t) {
        for (std::size_t k = 0; k < width; ++k) m(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) = rows[t][k];
    }
    return MultiSeries(std::move(m), std::move(labels));
}

/// Reads a CSV file ("-" for standard input).
inline MultiSeries read_series(const std::string& path, const ReadOptions& options = {}) {
    std::string text;
    if (path == "-") {
        text.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
    } else {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw data_error("cannot open " + path);
        text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    return parse_series(text, options);
}

inline std::string series_to_csv(const MultiSeries& x) {
    std::ostringstream out;
    for (std::size_t k = 0; k < x.dim(); ++k) out << (k ? "," : "") << x.labels()[k];
    out << '\n';
    for (Eigen::Index t = 0; t < x.values().rows(); ++t) {
        for (Eigen::Index k = 0; k < x.values().cols(); ++k) out << (k ? "," : "") << format_double(x.values()(t, k));
        out << '\n';
    }
    return out.str();
}

/// Writes text to a file, or to stdout when path is empty or "-".
inline void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write " + path);
    out << text;
}

}  // namespace serialdep
