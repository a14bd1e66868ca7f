#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "mlsvm/dataset.hpp"
#include "mlsvm/matrix.hpp"
#include "mlsvm/solver.hpp"

namespace mlsvm {

enum class WeightRule { ImbalanceRatio, Fixed };

// Two-stage uniform-design search space over (log2 C, log2 gamma). C+ and C-
// are coupled through the class imbalance ratio (or a fixed ratio).
struct SearchDomain {
    double log2c_lo = -5.0, log2c_hi = 15.0;
    double log2g_lo = -15.0, log2g_hi = 3.0;
    int stage1_runs = 9;
    int stage2_runs = 5;
    WeightRule weight_rule = WeightRule::ImbalanceRatio;
    double fixed_ratio = 1.0;  // C+ = ratio * C- when weight_rule == Fixed
};

struct Rect {
    double c_lo, c_hi, g_lo, g_hi;
};

// The fixed 2-factor uniform-design lattice for 5, 9 or 13 runs, affinely
// mapped onto the rectangle.
std::vector<std::array<double, 2>> ud_points(const Rect& rect, int runs);

struct Evaluation {
    ModelParams params;
    double kappa = 0.0;
    int stage = 1;
    double log2c = 0.0, log2g = 0.0;
    bool failed = false;
};

struct TuningResult {
    ModelParams best_params;
    double best_kappa = 0.0;
    TrainedModel best_model;
    std::vector<Evaluation> evaluations;
    long long n_trainings = 0;
};

struct TuneOptions {
    TrainOptions train;
    int threads = 0;
    std::ostream* trace = nullptr;  // CSV: stage,log2C,log2gamma,Cplus,Cminus,kappa_mean
};

// Two-stage UD search: stage 1 over the domain (or a half-size rectangle
// around `center` when given), stage 2 over a quarter-size rectangle around
// the stage-1 winner. Score = mean validation kappa over the folds, ties by
// smaller C then smaller gamma; the winner is retrained on all rows.
TuningResult tune(const Matrix& points, const std::vector<int>& labels,
                  const std::vector<double>& instance_weights,
                  const std::vector<FoldPair>& folds, const SearchDomain& domain,
                  std::optional<ModelParams> center = std::nullopt,
                  const TuneOptions& opts = {});

TuningResult tune(const Dataset& train, const std::vector<FoldPair>& folds,
                  const SearchDomain& domain, std::optional<ModelParams> center = std::nullopt,
                  const TuneOptions& opts = {});

}  // namespace mlsvm
