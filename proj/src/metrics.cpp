#include "mlsvm/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "mlsvm/error.hpp"

namespace mlsvm {

Metrics metrics_from_counts(std::size_t tp, std::size_t tn, std::size_t fp, std::size_t fn) {
    Metrics m;
    m.tp = tp;
    m.tn = tn;
    m.fp = fp;
    m.fn = fn;
    if (tp + fn > 0) {
        m.sn = static_cast<double>(tp) / static_cast<double>(tp + fn);
    } else {
        m.sn_defined = false;
    }
    if (tn + fp > 0) {
        m.sp = static_cast<double>(tn) / static_cast<double>(tn + fp);
    } else {
        m.sp_defined = false;
    }
    const std::size_t total = tp + tn + fp + fn;
    m.acc = total > 0 ? static_cast<double>(tp + tn) / static_cast<double>(total) : 0.0;
    m.kappa = std::sqrt(m.sn * m.sp);
    return m;
}

Metrics compute_metrics(const std::vector<int>& predicted, const std::vector<int>& actual) {
    if (predicted.size() != actual.size())
        throw DomainError("compute_metrics: length mismatch");
    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (actual[i] == +1)
            predicted[i] == +1 ? ++tp : ++fn;
        else
            predicted[i] == -1 ? ++tn : ++fp;
    }
    return metrics_from_counts(tp, tn, fp, fn);
}

std::string format_metrics(const Metrics& m) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "ACC=%.4f SN=%.4f SP=%.4f kappa=%.4f (tp=%zu tn=%zu fp=%zu fn=%zu)",
                  m.acc, m.sn, m.sp, m.kappa, m.tp, m.tn, m.fp, m.fn);
    return buf;
}

}  // namespace mlsvm
