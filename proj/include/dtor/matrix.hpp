#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace dtor {

// Dense row-major matrix of doubles. The only array shape used across the
// pipeline: datasets, detector inputs, synthetic neighborhoods.
struct Matrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<double> values;  // row-major, n_rows * n_cols

    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : n_rows(rows), n_cols(cols), values(rows * cols, fill) {}

    double operator()(std::size_t i, std::size_t j) const { return values[i * n_cols + j]; }
    double& operator()(std::size_t i, std::size_t j) { return values[i * n_cols + j]; }

    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * n_cols, n_cols};
    }
    std::span<double> row(std::size_t i) {
        return {values.data() + i * n_cols, n_cols};
    }

    void append_row(std::span<const double> r) {
        if (n_rows == 0 && n_cols == 0) n_cols = r.size();
        if (r.size() != n_cols) throw std::invalid_argument("append_row: width mismatch");
        values.insert(values.end(), r.begin(), r.end());
        ++n_rows;
    }

    Matrix select_rows(std::span<const std::size_t> idx) const {
        Matrix out(idx.size(), n_cols);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (idx[i] >= n_rows) throw std::out_of_range("select_rows: index out of range");
            auto src = row(idx[i]);
            std::copy(src.begin(), src.end(), out.values.begin() + i * n_cols);
        }
        return out;
    }
};

}  // namespace dtor
