#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mlsvm/error.hpp"
#include "mlsvm/matrix.hpp"

namespace mlsvm {

// One nonzero feature of a sample. Indices are 0-based internally; the sparse
// text format on disk is 1-based.
struct SparseEntry {
    int index;
    double value;
};
using SparseRow = std::vector<SparseEntry>;

enum class DataFormat { SparseSvmText, Csv };

// Labeled feature vectors. Labels are +1 (minority by convention) or -1.
// Rows are stored sparse; dense views are materialized on demand.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<SparseRow> rows, std::vector<int> labels, int n_features);

    std::size_t n() const { return rows_.size(); }
    int n_features() const { return n_features_; }
    std::size_t n_plus() const { return n_plus_; }
    std::size_t n_minus() const { return n_minus_; }
    bool has_labels() const { return has_labels_; }

    // fraction of samples in the majority class
    double imbalance_ratio() const;

    int label(std::size_t i) const { return labels_[i]; }
    const std::vector<int>& labels() const { return labels_; }
    const SparseRow& row(std::size_t i) const { return rows_[i]; }

    Matrix to_dense() const;
    Matrix to_dense(const std::vector<int>& indices) const;
    std::vector<double> dense_row(std::size_t i) const;

    Dataset subset(const std::vector<int>& indices) const;
    std::vector<int> indices_of_class(int label) const;

private:
    std::vector<SparseRow> rows_;
    std::vector<int> labels_;
    int n_features_ = 0;
    std::size_t n_plus_ = 0;
    std::size_t n_minus_ = 0;
    bool has_labels_ = true;

    void recount();
};

// Reads the sparse `<label> <index>:<value> ...` text format or CSV.
// label_column applies to CSV only (default: last column). Any two-valued
// label set is normalized to {-1,+1}: numeric labels compare numerically,
// otherwise lexicographically, smaller -> -1. A file whose labels are all
// zero is treated as unlabeled.
Dataset load_dataset(const std::string& path, DataFormat format,
                     std::optional<int> label_column = std::nullopt);

// Writes the sparse text format with full double precision, so that
// load(save(ds)) reproduces feature values bit-identically.
void save_dataset_sparse(const Dataset& ds, const std::string& path);

enum class NormalizationMode { None, MinMax, ZScore };

// Per-feature affine transform x' = (x - shift[j]) * scale[j], fitted on a
// training split and reusable on test data.
struct NormalizationParams {
    NormalizationMode mode = NormalizationMode::None;
    std::vector<double> shift;
    std::vector<double> scale;
};

std::pair<Dataset, NormalizationParams> normalize_features(const Dataset& ds,
                                                           NormalizationMode mode);
Dataset apply_normalization(const Dataset& ds, const NormalizationParams& params);

struct SplitIndices {
    std::vector<int> train;
    std::vector<int> test;
};

// Seeded stratified split; each class contributes round-half-up of
// test_fraction * class size to the test side.
SplitIndices stratified_split_indices(const std::vector<int>& labels, double test_fraction,
                                      std::uint64_t seed);
std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double test_fraction,
                                             std::uint64_t seed);

struct FoldPair {
    std::vector<int> train;
    std::vector<int> validation;
};

// Stratified k-fold partition of the index set.
std::vector<FoldPair> k_fold_indices(const std::vector<int>& labels, int k, std::uint64_t seed);
std::vector<FoldPair> k_fold_indices(const Dataset& ds, int k, std::uint64_t seed);

}  // namespace mlsvm
