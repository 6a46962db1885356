#pragma once

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "depthpca/errors.hpp"
#include "depthpca/linalg.hpp"

namespace depthpca {

// Strict CSV dialect: comma separator, one header row, plain decimal numbers,
// UTF-8, no quoting, no missing values.
struct CsvTable {
    std::vector<std::string> header;
    Matrix values;

    std::size_t column_index(const std::string& name) const {
        for (std::size_t j = 0; j < header.size(); ++j)
            if (header[j] == name) return j;
        throw InvalidInput("csv: no column named '" + name + "'");
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_csv_number(const std::string& cell, std::size_t row, std::size_t col) {
    if (cell.empty())
        throw InvalidInput("csv: missing value at row " + std::to_string(row) + ", column " +
                           std::to_string(col + 1));
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(cell.c_str(), &end);
    if (errno != 0 || end != cell.c_str() + cell.size())
        throw InvalidInput("csv: cannot parse '" + cell + "' at row " + std::to_string(row) +
                           ", column " + std::to_string(col + 1));
    if (!std::isfinite(v))
        throw InvalidInput("csv: non-finite value at row " + std::to_string(row));
    return v;
}

} // namespace detail

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput("csv: '" + path + "' is empty");
    CsvTable table;
    table.header = detail::split_csv_line(line);
    const std::size_t cols = table.header.size();

    std::vector<double> flat;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() && in.eof()) break;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != cols)
            throw InvalidInput("csv: row " + std::to_string(rows + 1) + " has " +
                               std::to_string(cells.size()) + " fields, expected " +
                               std::to_string(cols));
        for (std::size_t j = 0; j < cols; ++j)
            flat.push_back(detail::parse_csv_number(cells[j], rows + 1, j));
        ++rows;
    }
    table.values = Matrix(rows, cols);
    table.values.data() = std::move(flat);
    return table;
}

// 17 significant digits: doubles round-trip losslessly.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path) {
        if (!out_) throw IoError("cannot open '" + path + "' for writing");
    }

    void header(const std::vector<std::string>& names) { raw_row(names); }

    void row(const std::vector<std::string>& cells) { raw_row(cells); }

    void numeric_row(const std::vector<double>& values) {
        std::vector<std::string> cells;
        cells.reserve(values.size());
        for (double v : values) cells.push_back(format_double(v));
        raw_row(cells);
    }

private:
    void raw_row(const std::vector<std::string>& cells) {
        for (std::size_t j = 0; j < cells.size(); ++j) {
            if (j) out_ << ',';
            out_ << cells[j];
        }
        out_ << '\n';
        if (!out_) throw IoError("csv write failed");
    }

    std::ofstream out_;
};

} // namespace depthpca
