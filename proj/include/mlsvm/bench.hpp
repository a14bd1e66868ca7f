#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mlsvm/dataset.hpp"
#include "mlsvm/metrics.hpp"
#include "mlsvm/multilevel.hpp"

namespace mlsvm {

enum class RunMode { Multilevel, Flat };

inline const char* run_mode_name(RunMode m) {
    return m == RunMode::Multilevel ? "multilevel" : "flat";
}

struct RunResult {
    Metrics metrics;
    double seconds = 0.0;  // training wall time (graphs + tuning included)
    MultilevelResult detail;
};

// One benchmark execution: stratified train/test split, min-max scaling
// fitted on the training side, train, evaluate on the held-out side.
RunResult run_once(const Dataset& full, RunMode mode, const MultilevelConfig& cfg,
                   double test_fraction, std::uint64_t split_seed,
                   NormalizationMode norm = NormalizationMode::MinMax);

struct RawRow {
    std::string dataset;
    std::string mode;
    int caliber = 0;
    int rep = 0;
    Metrics metrics;
    double seconds = 0.0;
};

struct AggRow {
    std::string dataset;
    std::string mode;
    int caliber = 0;
    int reps = 0;
    double acc = 0, sn = 0, sp = 0, kappa = 0, seconds = 0;
};

// Group-wise means over (dataset, mode, caliber); input order preserved.
std::vector<AggRow> aggregate_rows(const std::vector<RawRow>& raw);

void write_raw_csv(const std::vector<RawRow>& rows, std::ostream& out,
                   const std::vector<std::pair<std::string, std::string>>& header);
void write_agg_csv(const std::vector<AggRow>& rows, std::ostream& out,
                   const std::vector<std::pair<std::string, std::string>>& header);

struct BenchDataset {
    std::string name;
    Dataset data;
};

struct BenchPlan {
    std::vector<RunMode> modes{RunMode::Multilevel};
    std::vector<int> sweep_calibers;  // empty: use cfg.caliber as-is
    int reps = 20;
    double test_fraction = 0.2;
    std::uint64_t base_seed = 0;
    NormalizationMode norm = NormalizationMode::MinMax;
    std::ostream* progress = nullptr;
};

// dataset x mode x caliber x repetition sweep; repetition r uses seed
// base_seed + r for both the split and the engine. Per-run failures are
// recorded and skipped.
std::vector<RawRow> run_benchmark(const std::vector<BenchDataset>& datasets,
                                  const MultilevelConfig& cfg, const BenchPlan& plan,
                                  std::vector<std::string>* errors = nullptr);

}  // namespace mlsvm
