#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "scsl/grid.hpp"

namespace scsl {

enum class ValueDomain { Binary, Continuous };

// Binary values are stored as {0,1} on ingestion; model fitting uses the
// {-1,+1} coding produced by recode_binary.
enum class Coding { ZeroOne, PlusMinus };

struct DataMatrix {
    Grid<double> x;  // n rows, p cols
    Grid<double> y;  // n rows, m cols
    ValueDomain domain = ValueDomain::Binary;
    Coding coding = Coding::ZeroOne;
    std::vector<std::string> x_names;
    std::vector<std::string> y_names;

    std::size_t n() const { return x.rows(); }
    std::size_t p() const { return x.cols(); }
    std::size_t m() const { return y.cols(); }
};

// Ground truth for a bipartite graph whose edges all point from X to Y.
struct GroundTruthGraph {
    Grid<std::uint8_t> adjacency;  // p rows, m cols; adjacency(j,k) = 1 iff X_j -> Y_k
};

struct NamedColumns {
    std::vector<std::string> names;
    Grid<double> values;
};

// One header row; cells separated by commas; LF or CRLF line endings.
// Labels restricted to [A-Za-z0-9_].
NamedColumns load_single_csv(const std::filesystem::path& file, ValueDomain domain);

DataMatrix load_csv(const std::filesystem::path& x_file, const std::filesystem::path& y_file,
                    ValueDomain domain);

// Values written with enough digits to round-trip exactly; binary values as 0/1.
void write_single_csv(const std::filesystem::path& file, const std::vector<std::string>& names,
                      const Grid<double>& values, ValueDomain domain);

// {0,1} -> {-1,+1}; rejects continuous data and data already recoded.
DataMatrix recode_binary(const DataMatrix& data);

bool valid_label(const std::string& s);

}  // namespace scsl
