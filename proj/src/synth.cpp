#include "mlsvm/synth.hpp"

#include <cmath>

#include "mlsvm/rng.hpp"

namespace mlsvm {

namespace {

SparseRow dense_to_row(const std::vector<double>& x) {
    SparseRow row;
    row.reserve(x.size());
    for (std::size_t j = 0; j < x.size(); ++j)
        if (x[j] != 0.0) row.push_back({static_cast<int>(j), x[j]});
    return row;
}

Dataset assemble(std::vector<SparseRow> rows, std::vector<int> labels, int d) {
    return Dataset(std::move(rows), std::move(labels), d);
}

}  // namespace

Dataset gen_ringnorm(std::size_t n, int d, std::uint64_t seed) {
    Rng rng(mix_seed(seed, 0x519));
    const double a = 2.0 / std::sqrt(static_cast<double>(d));
    std::vector<SparseRow> rows;
    std::vector<int> labels;
    std::vector<double> x(static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < n; ++i) {
        const bool plus = rng.uniform() < 0.5;
        for (auto& v : x) v = plus ? 2.0 * rng.normal() : a + rng.normal();
        rows.push_back(dense_to_row(x));
        labels.push_back(plus ? +1 : -1);
    }
    return assemble(std::move(rows), std::move(labels), d);
}

Dataset gen_twonorm(std::size_t n, int d, std::uint64_t seed) {
    Rng rng(mix_seed(seed, 0x2a0));
    const double a = 2.0 / std::sqrt(static_cast<double>(d));
    std::vector<SparseRow> rows;
    std::vector<int> labels;
    std::vector<double> x(static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < n; ++i) {
        const bool plus = rng.uniform() < 0.5;
        const double mean = plus ? a : -a;
        for (auto& v : x) v = mean + rng.normal();
        rows.push_back(dense_to_row(x));
        labels.push_back(plus ? +1 : -1);
    }
    return assemble(std::move(rows), std::move(labels), d);
}

Dataset gen_threenorm(std::size_t n, int d, std::uint64_t seed) {
    Rng rng(mix_seed(seed, 0x3a0));
    const double a = 2.0 / std::sqrt(static_cast<double>(d));
    std::vector<SparseRow> rows;
    std::vector<int> labels;
    std::vector<double> x(static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < n; ++i) {
        const bool plus = rng.uniform() < 0.5;
        if (plus) {
            const double mean = rng.uniform() < 0.5 ? a : -a;
            for (auto& v : x) v = mean + rng.normal();
        } else {
            for (std::size_t j = 0; j < x.size(); ++j)
                x[j] = (j % 2 == 0 ? a : -a) + rng.normal();
        }
        rows.push_back(dense_to_row(x));
        labels.push_back(plus ? +1 : -1);
    }
    return assemble(std::move(rows), std::move(labels), d);
}

Dataset gen_two_gaussians(std::size_t n, int d, double separation, double minority_fraction,
                          std::uint64_t seed, double sigma_plus, double sigma_minus) {
    Rng rng(mix_seed(seed, 0x26a));
    const auto n_plus =
        static_cast<std::size_t>(std::floor(minority_fraction * static_cast<double>(n) + 0.5));
    std::vector<SparseRow> rows;
    std::vector<int> labels;
    std::vector<double> x(static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < n; ++i) {
        const bool plus = i < n_plus;
        const double sigma = plus ? sigma_plus : sigma_minus;
        for (auto& v : x) v = sigma * rng.normal();
        x[0] += plus ? 0.5 * separation : -0.5 * separation;
        rows.push_back(dense_to_row(x));
        labels.push_back(plus ? +1 : -1);
    }
    return assemble(std::move(rows), std::move(labels), d);
}

}  // namespace mlsvm
