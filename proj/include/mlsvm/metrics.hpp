#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mlsvm {

// Confusion counts plus the derived ratios. kappa is the G-mean
// sqrt(SN * SP). Ratios with a zero denominator are reported as 0 and the
// matching *_defined flag is cleared.
struct Metrics {
    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
    double sn = 0.0;
    double sp = 0.0;
    double acc = 0.0;
    double kappa = 0.0;
    bool sn_defined = true;
    bool sp_defined = true;
};

Metrics metrics_from_counts(std::size_t tp, std::size_t tn, std::size_t fp, std::size_t fn);

// predicted/actual hold values in {-1,+1}; lengths must match.
Metrics compute_metrics(const std::vector<int>& predicted, const std::vector<int>& actual);

std::string format_metrics(const Metrics& m);

}  // namespace mlsvm
