#include "scsl/data.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "scsl/errors.hpp"
#include "scsl/fs_util.hpp"

namespace scsl {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    cells.push_back(cur);
    return cells;
}

double parse_cell(const std::string& cell, const std::string& file, std::size_t lineno,
                  std::size_t col) {
    if (cell.empty()) {
        throw ParseError(file + ":" + std::to_string(lineno) + ": empty cell in column " +
                         std::to_string(col + 1));
    }
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        throw ParseError(file + ":" + std::to_string(lineno) + ": cannot parse value '" + cell +
                         "' in column " + std::to_string(col + 1));
    }
    return v;
}

}  // namespace

bool valid_label(const std::string& s) {
    if (s.empty()) return false;
    for (char ch : s) {
        bool ok = (ch >= 'A' && ch <= 'Z') || (ch >= 'a' && ch <= 'z') ||
                  (ch >= '0' && ch <= '9') || ch == '_';
        if (!ok) return false;
    }
    return true;
}

NamedColumns load_single_csv(const std::filesystem::path& file, ValueDomain domain) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error("cannot open: " + file.string());
    const std::string fname = file.filename().string();

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    // Ignore a single trailing blank line.
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) throw ParseError(fname + ": missing header row");

    NamedColumns out;
    out.names = split_line(lines[0]);
    std::set<std::string> seen;
    for (const auto& name : out.names) {
        if (!valid_label(name)) {
            throw ParseError(fname + ":1: invalid column label '" + name +
                             "' (allowed: [A-Za-z0-9_])");
        }
        if (!seen.insert(name).second) {
            throw DuplicateColumn(fname + ":1: duplicate column label '" + name + "'");
        }
    }

    const std::size_t cols = out.names.size();
    const std::size_t rows = lines.size() - 1;
    out.values = Grid<double>(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t lineno = r + 2;
        auto cells = split_line(lines[r + 1]);
        if (cells.size() != cols) {
            throw ParseError(fname + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(cols) + " cells, got " + std::to_string(cells.size()));
        }
        for (std::size_t c = 0; c < cols; ++c) {
            double v = parse_cell(cells[c], fname, lineno, c);
            if (domain == ValueDomain::Binary && v != 0.0 && v != 1.0) {
                throw DomainViolation(fname + ":" + std::to_string(lineno) +
                                      ": binary data must be 0 or 1, got '" + cells[c] + "'");
            }
            out.values.at(r, c) = v;
        }
    }
    return out;
}

DataMatrix load_csv(const std::filesystem::path& x_file, const std::filesystem::path& y_file,
                    ValueDomain domain) {
    NamedColumns xc = load_single_csv(x_file, domain);
    NamedColumns yc = load_single_csv(y_file, domain);
    if (xc.values.rows() != yc.values.rows()) {
        throw MismatchedRows(x_file.filename().string() + " has " +
                             std::to_string(xc.values.rows()) + " rows but " +
                             y_file.filename().string() + " has " +
                             std::to_string(yc.values.rows()));
    }
    DataMatrix d;
    d.x = std::move(xc.values);
    d.y = std::move(yc.values);
    d.x_names = std::move(xc.names);
    d.y_names = std::move(yc.names);
    d.domain = domain;
    d.coding = Coding::ZeroOne;
    return d;
}

void write_single_csv(const std::filesystem::path& file, const std::vector<std::string>& names,
                      const Grid<double>& values, ValueDomain domain) {
    if (names.size() != values.cols()) {
        throw ShapeMismatch("column name count " + std::to_string(names.size()) +
                            " does not match column count " + std::to_string(values.cols()));
    }
    std::string out;
    for (std::size_t c = 0; c < names.size(); ++c) {
        if (c) out.push_back(',');
        out += names[c];
    }
    out.push_back('\n');
    char buf[64];
    for (std::size_t r = 0; r < values.rows(); ++r) {
        for (std::size_t c = 0; c < values.cols(); ++c) {
            if (c) out.push_back(',');
            double v = values.at(r, c);
            if (domain == ValueDomain::Binary) {
                out.push_back(v == 1.0 ? '1' : '0');
            } else {
                std::snprintf(buf, sizeof(buf), "%.17g", v);
                out += buf;
            }
        }
        out.push_back('\n');
    }
    write_text_atomic(file, out);
}

DataMatrix recode_binary(const DataMatrix& data) {
    if (data.domain != ValueDomain::Binary) {
        throw DomainViolation("recode_binary requires binary data");
    }
    if (data.coding != Coding::ZeroOne) {
        throw DomainViolation("data is already recoded to {-1,+1}");
    }
    DataMatrix out = data;
    for (double& v : out.x.data()) v = (v == 1.0) ? 1.0 : -1.0;
    for (double& v : out.y.data()) v = (v == 1.0) ? 1.0 : -1.0;
    out.coding = Coding::PlusMinus;
    return out;
}

}  // namespace scsl
