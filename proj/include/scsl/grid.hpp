#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace scsl {

// Dense row-major 2-D array, value semantics.
template <typename T>
class Grid {
public:
    Grid() : rows_(0), cols_(0) {}
    Grid(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), v_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    T& at(std::size_t r, std::size_t c) { return v_[r * cols_ + c]; }
    const T& at(std::size_t r, std::size_t c) const { return v_[r * cols_ + c]; }

    std::span<T> row(std::size_t r) { return {v_.data() + r * cols_, cols_}; }
    std::span<const T> row(std::size_t r) const { return {v_.data() + r * cols_, cols_}; }

    std::vector<T>& data() { return v_; }
    const std::vector<T>& data() const { return v_; }

    bool operator==(const Grid&) const = default;

private:
    std::size_t rows_, cols_;
    std::vector<T> v_;
};

}  // namespace scsl
