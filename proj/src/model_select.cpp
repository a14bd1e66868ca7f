#include "mlsvm/model_select.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include <atomic>

#include "mlsvm/metrics.hpp"
#include "mlsvm/parallel.hpp"

namespace mlsvm {

namespace {

// Good-lattice-point uniform designs, two factors. Levels are 1..runs; level
// l maps to fraction l / (runs + 1).
constexpr std::array<std::array<int, 2>, 5> kUd5 = {{{1, 2}, {2, 4}, {3, 1}, {4, 3}, {5, 5}}};
constexpr std::array<std::array<int, 2>, 9> kUd9 = {
    {{1, 4}, {2, 8}, {3, 3}, {4, 7}, {5, 2}, {6, 6}, {7, 1}, {8, 5}, {9, 9}}};
constexpr std::array<std::array<int, 2>, 13> kUd13 = {{{1, 5},
                                                       {2, 10},
                                                       {3, 2},
                                                       {4, 7},
                                                       {5, 12},
                                                       {6, 4},
                                                       {7, 9},
                                                       {8, 1},
                                                       {9, 6},
                                                       {10, 11},
                                                       {11, 3},
                                                       {12, 8},
                                                       {13, 13}}};

Rect clip_rect(double c_center, double g_center, double c_side, double g_side,
               const Rect& domain) {
    Rect r;
    r.c_lo = std::max(domain.c_lo, c_center - 0.5 * c_side);
    r.c_hi = std::min(domain.c_hi, c_center + 0.5 * c_side);
    r.g_lo = std::max(domain.g_lo, g_center - 0.5 * g_side);
    r.g_hi = std::min(domain.g_hi, g_center + 0.5 * g_side);
    return r;
}

ModelParams expand_params(double log2c, double log2g, const SearchDomain& domain,
                          std::size_t n_plus, std::size_t n_minus) {
    const double c = std::exp2(log2c);
    double ratio = 1.0;
    if (domain.weight_rule == WeightRule::ImbalanceRatio) {
        ratio = n_plus > 0 ? static_cast<double>(n_minus) / static_cast<double>(n_plus) : 1.0;
    } else {
        ratio = domain.fixed_ratio;
    }
    ModelParams p;
    p.c_plus = c * ratio;
    p.c_minus = c;
    p.gamma = std::exp2(log2g);
    return p;
}

}  // namespace

std::vector<std::array<double, 2>> ud_points(const Rect& rect, int runs) {
    if (!(rect.c_hi > rect.c_lo) || !(rect.g_hi > rect.g_lo))
        throw DomainError("ud_points: degenerate search rectangle");
    const std::array<int, 2>* table = nullptr;
    switch (runs) {
        case 5: table = kUd5.data(); break;
        case 9: table = kUd9.data(); break;
        case 13: table = kUd13.data(); break;
        default: throw DomainError("ud_points: run count must be 5, 9 or 13");
    }
    std::vector<std::array<double, 2>> pts(static_cast<std::size_t>(runs));
    const double denom = static_cast<double>(runs + 1);
    for (int i = 0; i < runs; ++i) {
        const double fc = static_cast<double>(table[i][0]) / denom;
        const double fg = static_cast<double>(table[i][1]) / denom;
        pts[static_cast<std::size_t>(i)] = {rect.c_lo + fc * (rect.c_hi - rect.c_lo),
                                            rect.g_lo + fg * (rect.g_hi - rect.g_lo)};
    }
    return pts;
}

TuningResult tune(const Matrix& points, const std::vector<int>& labels,
                  const std::vector<double>& instance_weights,
                  const std::vector<FoldPair>& folds, const SearchDomain& domain,
                  std::optional<ModelParams> center, const TuneOptions& opts) {
    if (folds.empty()) throw DomainError("tune: need at least one fold");
    std::size_t n_plus = 0, n_minus = 0;
    for (int y : labels) (y == +1 ? n_plus : n_minus)++;
    if (n_plus == 0 || n_minus == 0) throw DomainError("tune: need both classes");

    const Rect domain_rect{domain.log2c_lo, domain.log2c_hi, domain.log2g_lo,
                           domain.log2g_hi};
    const double c_side = domain_rect.c_hi - domain_rect.c_lo;
    const double g_side = domain_rect.g_hi - domain_rect.g_lo;

    TuningResult result;

    // gather per-fold training slices once
    struct FoldData {
        Matrix x_train;
        std::vector<int> y_train;
        std::vector<double> w_train;
        Matrix x_val;
        std::vector<int> y_val;
    };
    std::vector<FoldData> fd(folds.size());
    for (std::size_t f = 0; f < folds.size(); ++f) {
        fd[f].x_train = points.gather(folds[f].train);
        fd[f].x_val = points.gather(folds[f].validation);
        for (int i : folds[f].train) {
            fd[f].y_train.push_back(labels[static_cast<std::size_t>(i)]);
            if (!instance_weights.empty())
                fd[f].w_train.push_back(instance_weights[static_cast<std::size_t>(i)]);
        }
        for (int i : folds[f].validation)
            fd[f].y_val.push_back(labels[static_cast<std::size_t>(i)]);
    }

    std::atomic<long long> attempts{0};
    auto evaluate_stage = [&](const Rect& rect, int runs, int stage) {
        const auto pts = ud_points(rect, runs);
        const std::size_t base = result.evaluations.size();
        result.evaluations.resize(base + pts.size());
        parallel_for(0, pts.size(), opts.threads, [&](std::size_t q) {
            Evaluation ev;
            ev.stage = stage;
            ev.log2c = pts[q][0];
            ev.log2g = pts[q][1];
            ev.params = expand_params(ev.log2c, ev.log2g, domain, n_plus, n_minus);
            double kappa_sum = 0.0;
            for (const auto& f : fd) {
                ++attempts;
                try {
                    const TrainedModel m =
                        train(f.x_train, f.y_train, f.w_train, ev.params, opts.train);
                    kappa_sum += compute_metrics(m.predict_all(f.x_val), f.y_val).kappa;
                } catch (const std::exception&) {
                    ev.failed = true;  // candidate scored 0, search continues
                    break;
                }
            }
            ev.kappa = ev.failed ? 0.0 : kappa_sum / static_cast<double>(fd.size());
            result.evaluations[base + q] = ev;
        });
    };

    // stage 1: full domain, or a half-size rectangle around the inherited center
    Rect stage1_rect = domain_rect;
    if (center) {
        stage1_rect = clip_rect(std::log2(center->c_minus), std::log2(center->gamma),
                                0.5 * c_side, 0.5 * g_side, domain_rect);
    }
    evaluate_stage(stage1_rect, domain.stage1_runs, 1);

    auto better = [](const Evaluation& a, const Evaluation& b) {
        if (a.kappa != b.kappa) return a.kappa > b.kappa;
        if (a.params.c_minus != b.params.c_minus) return a.params.c_minus < b.params.c_minus;
        return a.params.gamma < b.params.gamma;
    };
    const Evaluation* winner = &result.evaluations[0];
    for (const auto& ev : result.evaluations)
        if (better(ev, *winner)) winner = &ev;

    // stage 2: quarter-size rectangle around the stage-1 winner
    const Rect stage2_rect =
        clip_rect(winner->log2c, winner->log2g, 0.25 * c_side, 0.25 * g_side, domain_rect);
    evaluate_stage(stage2_rect, domain.stage2_runs, 2);

    winner = &result.evaluations[0];
    for (const auto& ev : result.evaluations)
        if (better(ev, *winner)) winner = &ev;

    if (opts.trace) {
        char buf[160];
        for (const auto& ev : result.evaluations) {
            std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f,%.17g,%.17g,%.6f\n", ev.stage,
                          ev.log2c, ev.log2g, ev.params.c_plus, ev.params.c_minus, ev.kappa);
            *opts.trace << buf;
        }
    }

    result.best_params = winner->params;
    result.best_kappa = winner->kappa;
    result.best_model = train(points, labels, instance_weights, winner->params, opts.train);
    result.n_trainings = attempts.load() + 1;
    return result;
}

TuningResult tune(const Dataset& train_ds, const std::vector<FoldPair>& folds,
                  const SearchDomain& domain, std::optional<ModelParams> center,
                  const TuneOptions& opts) {
    return tune(train_ds.to_dense(), train_ds.labels(), {}, folds, domain, center, opts);
}

}  // namespace mlsvm
