#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mlsvm/coarsening.hpp"
#include "mlsvm/dataset.hpp"
#include "mlsvm/metrics.hpp"
#include "mlsvm/model_select.hpp"
#include "mlsvm/solver.hpp"

namespace mlsvm {

struct MultilevelConfig {
    int knn_k = 10;
    KnnConfig knn;

    double coupling_threshold = 0.5;  // Q
    double outlier_factor = 2.0;      // eta
    int caliber = 2;                  // R
    std::size_t stop_size = 500;
    int max_levels = 50;
    CoarseEdges coarse_edges = CoarseEdges::Knn;

    std::size_t q_dt = 4000;  // refine parameters below this training size
    SearchDomain ud;
    double tol = 1e-3;
    int folds = 5;
    bool neighbor_expand = false;
    bool volume_weighting = false;

    // carved once before coarsening, only for per-level kappa reporting
    double validation_fraction = 0.10;

    std::uint64_t seed = 0;
    int threads = 0;
    std::ostream* log = nullptr;
};

struct LevelReportRow {
    int level = 0;
    std::size_t n_plus = 0;   // nodes at this level
    std::size_t n_minus = 0;
    std::size_t n_train = 0;  // rows actually trained on
    bool refined = false;     // parameters re-tuned at this level
    double log2c_plus = 0.0;
    double log2c_minus = 0.0;
    double log2gamma = 0.0;
    std::size_t n_sv = 0;
    double kappa_val = 0.0;
    double seconds = 0.0;
};

struct MultilevelResult {
    TrainedModel model;
    ModelParams params;
    std::vector<LevelReportRow> report;  // coarsest first
    // support-vector rows of the final model, as indices into the training
    // Dataset handed to train_multilevel
    std::vector<int> sv_train_indices;
};

// The full pipeline: per-class k-NN graphs and coarsening hierarchies,
// uniform-design learning at the coarsest level, then support-vector-driven
// uncoarsening with parameter inheritance.
MultilevelResult train_multilevel(const Dataset& train, const MultilevelConfig& cfg);

// Baseline: one uniform-design search over the whole training pool. Shares
// the validation carve and fold seeding with train_multilevel, so the two
// coincide exactly when stop_size >= n.
MultilevelResult train_flat(const Dataset& train, const MultilevelConfig& cfg);

Metrics predict_final(const TrainedModel& model, const Dataset& test);

void write_report_csv(const std::vector<LevelReportRow>& report, std::ostream& out,
                      const std::vector<std::pair<std::string, std::string>>& header);

}  // namespace mlsvm
