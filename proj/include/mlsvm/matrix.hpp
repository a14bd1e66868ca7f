#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace mlsvm {

// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    std::span<double> row(std::size_t i) {
        assert(i < rows);
        return {data.data() + i * cols, cols};
    }
    std::span<const double> row(std::size_t i) const {
        assert(i < rows);
        return {data.data() + i * cols, cols};
    }
    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    Matrix gather(const std::vector<int>& indices) const {
        Matrix out(indices.size(), cols);
        for (std::size_t i = 0; i < indices.size(); ++i) {
            const auto src = row(static_cast<std::size_t>(indices[i]));
            std::copy(src.begin(), src.end(), out.row(i).begin());
        }
        return out;
    }
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace mlsvm
