#include "mlsvm/multilevel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <set>

#include "mlsvm/rng.hpp"

namespace mlsvm {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_seconds(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// seed streams
constexpr std::uint64_t kStreamValidation = 7;
constexpr std::uint64_t kStreamKnnPlus = 21;
constexpr std::uint64_t kStreamKnnMinus = 22;
constexpr std::uint64_t kStreamFoldBase = 100;

struct ClassData {
    std::vector<int> pool_rows;  // node id at the finest level -> pool row
    Matrix points;
    ClassHierarchy hierarchy;
};

// Training slice of one level: plus rows first, then minus rows; node ids
// kept so support vectors can be traced per class.
struct LevelSlice {
    Matrix x;
    std::vector<int> y;
    std::vector<double> w;
    std::vector<int> nodes_plus;
    std::vector<int> nodes_minus;
};

LevelSlice make_slice(const Level& lp, const Level& lm, std::vector<int> nodes_plus,
                      std::vector<int> nodes_minus, bool volume_weighting) {
    LevelSlice s;
    s.nodes_plus = std::move(nodes_plus);
    s.nodes_minus = std::move(nodes_minus);
    const std::size_t d = lp.points.cols;
    s.x = Matrix(s.nodes_plus.size() + s.nodes_minus.size(), d);
    std::size_t r = 0;
    for (int nid : s.nodes_plus) {
        const auto src = lp.points.row(static_cast<std::size_t>(nid));
        std::copy(src.begin(), src.end(), s.x.row(r++).begin());
        s.y.push_back(+1);
        if (volume_weighting) s.w.push_back(lp.graph.volumes[static_cast<std::size_t>(nid)]);
    }
    for (int nid : s.nodes_minus) {
        const auto src = lm.points.row(static_cast<std::size_t>(nid));
        std::copy(src.begin(), src.end(), s.x.row(r++).begin());
        s.y.push_back(-1);
        if (volume_weighting) s.w.push_back(lm.graph.volumes[static_cast<std::size_t>(nid)]);
    }
    return s;
}

std::vector<int> all_nodes(const Level& lv) {
    std::vector<int> out(lv.graph.n_nodes());
    std::iota(out.begin(), out.end(), 0);
    return out;
}

// k-fold that degrades gracefully on tiny levels: k is capped by the smaller
// class; below 2 points per class a single train==validation fold is used.
std::vector<FoldPair> level_folds(const std::vector<int>& labels, int k, std::uint64_t seed) {
    std::size_t np = 0, nm = 0;
    for (int y : labels) (y == +1 ? np : nm)++;
    const std::size_t mc = std::min(np, nm);
    if (mc >= 2) {
        return k_fold_indices(labels, std::min<int>(k, static_cast<int>(mc)), seed);
    }
    FoldPair f;
    f.train.resize(labels.size());
    std::iota(f.train.begin(), f.train.end(), 0);
    f.validation = f.train;
    return {f};
}

struct LevelSolution {
    TrainedModel model;
    ModelParams params;
    std::vector<int> sv_nodes_plus;
    std::vector<int> sv_nodes_minus;
};

LevelSolution split_solution(const LevelSlice& slice, TrainedModel model, ModelParams params) {
    LevelSolution sol;
    sol.params = params;
    for (int idx : model.sv_indices) {
        const auto u = static_cast<std::size_t>(idx);
        if (u < slice.nodes_plus.size())
            sol.sv_nodes_plus.push_back(slice.nodes_plus[u]);
        else
            sol.sv_nodes_minus.push_back(
                slice.nodes_minus[u - slice.nodes_plus.size()]);
    }
    sol.model = std::move(model);
    return sol;
}

// union of aggregates I^{-1}(p) over the coarse support vectors p, plus the
// fine k-NN neighborhoods when requested
std::vector<int> refinement_nodes(const Level& fine, const Level& coarse,
                                  const std::vector<int>& sv_nodes, bool neighbor_expand,
                                  std::ostream* log, const char* cls) {
    const auto cols = coarse.interp->columns();
    std::set<int> nodes;
    for (int p : sv_nodes)
        for (int i : cols[static_cast<std::size_t>(p)]) nodes.insert(i);
    if (nodes.empty()) {
        // no coarse support vectors for this class: fall back to every aggregate
        if (log)
            *log << "uncoarsen level " << fine.level_index << " class " << cls
                 << ": empty training set, falling back to all aggregates\n";
        for (const auto& col : cols)
            for (int i : col) nodes.insert(i);
    }
    if (neighbor_expand) {
        std::set<int> expanded = nodes;
        for (int i : nodes)
            for (int j : fine.graph.neighbors(i)) expanded.insert(j);
        nodes = std::move(expanded);
    }
    return {nodes.begin(), nodes.end()};
}

Metrics validation_metrics(const TrainedModel& model, const Matrix& x_val,
                           const std::vector<int>& y_val) {
    if (x_val.rows == 0) return {};
    return compute_metrics(model.predict_all(x_val), y_val);
}

MultilevelResult run_engine(const Dataset& train_ds, const MultilevelConfig& cfg, bool flat) {
    if (train_ds.n_plus() == 0 || train_ds.n_minus() == 0)
        throw DomainError("train_multilevel: need both classes");
    if (cfg.stop_size < 2) throw DomainError("train_multilevel: stop_size must be >= 2");
    if (cfg.q_dt < cfg.stop_size)
        throw DomainError("train_multilevel: q_dt must be >= stop_size");

    // held-out slice for per-level kappa reporting; never trained on
    std::vector<int> pool_rows(static_cast<int>(train_ds.n()));
    std::iota(pool_rows.begin(), pool_rows.end(), 0);
    std::vector<int> val_rows;
    if (cfg.validation_fraction > 0.0) {
        auto si = stratified_split_indices(train_ds.labels(), cfg.validation_fraction,
                                           mix_seed(cfg.seed, kStreamValidation));
        pool_rows = std::move(si.train);
        val_rows = std::move(si.test);
    }
    Matrix x_val = train_ds.to_dense(val_rows);
    std::vector<int> y_val;
    for (int i : val_rows) y_val.push_back(train_ds.label(static_cast<std::size_t>(i)));

    // per-class finest graphs and hierarchies (classes are never mixed)
    CoarseningConfig ccfg;
    ccfg.coupling_threshold = cfg.coupling_threshold;
    ccfg.outlier_factor = cfg.outlier_factor;
    ccfg.caliber = cfg.caliber;
    ccfg.knn_k = cfg.knn_k;
    ccfg.stop_size = cfg.stop_size;
    ccfg.max_levels = cfg.max_levels;
    ccfg.coarse_edges = cfg.coarse_edges;
    ccfg.knn = cfg.knn;
    ccfg.knn.threads = cfg.threads;

    std::array<ClassData, 2> cls;  // [0] = plus, [1] = minus
    for (int c = 0; c < 2; ++c) {
        const int label = c == 0 ? +1 : -1;
        auto& cd = cls[static_cast<std::size_t>(c)];
        for (int row : pool_rows)
            if (train_ds.label(static_cast<std::size_t>(row)) == label)
                cd.pool_rows.push_back(row);
        if (cd.pool_rows.empty())
            throw DomainError("train_multilevel: a class vanished in the validation carve");
        cd.points = train_ds.to_dense(cd.pool_rows);
    }

    MultilevelResult result;

    if (!flat) {
        for (int c = 0; c < 2; ++c) {
            auto& cd = cls[static_cast<std::size_t>(c)];
            const std::size_t nc = cd.points.rows;
            ccfg.knn.seed = mix_seed(cfg.seed, c == 0 ? kStreamKnnPlus : kStreamKnnMinus);
            AffinityGraph g;
            if (nc >= 2) {
                g = build_knn_graph(cd.points, std::min<int>(cfg.knn_k, static_cast<int>(nc) - 1),
                                    ccfg.knn);
            } else {
                g.offsets = {0, 0};
                g.volumes = {1.0};
                g.point_refs = {0};
            }
            cd.hierarchy = build_hierarchy(std::move(g), cd.points, ccfg);
        }
        const std::size_t depth =
            std::max(cls[0].hierarchy.depth(), cls[1].hierarchy.depth());
        copy_small_class_levels(cls[0].hierarchy, depth);
        copy_small_class_levels(cls[1].hierarchy, depth);
    } else {
        // flat mode is the 1-level degenerate hierarchy
        for (int c = 0; c < 2; ++c) {
            auto& cd = cls[static_cast<std::size_t>(c)];
            Level finest;
            AffinityGraph g;
            g.offsets.assign(cd.points.rows + 1, 0);
            g.volumes.assign(cd.points.rows, 1.0);
            g.point_refs.resize(cd.points.rows);
            std::iota(g.point_refs.begin(), g.point_refs.end(), 0);
            finest.graph = std::move(g);
            finest.points = cd.points;
            cd.hierarchy.levels.push_back(std::move(finest));
        }
    }

    const int depth = static_cast<int>(cls[0].hierarchy.depth());

    TuneOptions topts;
    topts.train.tol = cfg.tol;
    topts.threads = cfg.threads;

    // coarsest level: full-domain uniform design
    LevelSolution sol;
    for (int level = depth - 1; level >= 0; --level) {
        const auto t0 = Clock::now();
        const Level& lp = cls[0].hierarchy.levels[static_cast<std::size_t>(level)];
        const Level& lm = cls[1].hierarchy.levels[static_cast<std::size_t>(level)];

        LevelReportRow row;
        row.level = level;
        row.n_plus = lp.graph.n_nodes();
        row.n_minus = lm.graph.n_nodes();

        LevelSlice slice;
        bool refine = true;
        std::optional<ModelParams> center;
        if (level == depth - 1) {
            slice = make_slice(lp, lm, all_nodes(lp), all_nodes(lm), cfg.volume_weighting);
        } else {
            auto nodes_plus = refinement_nodes(lp, cls[0].hierarchy.levels[static_cast<std::size_t>(level + 1)],
                                               sol.sv_nodes_plus, cfg.neighbor_expand,
                                               cfg.log, "+1");
            auto nodes_minus = refinement_nodes(lm, cls[1].hierarchy.levels[static_cast<std::size_t>(level + 1)],
                                                sol.sv_nodes_minus, cfg.neighbor_expand,
                                                cfg.log, "-1");
            slice = make_slice(lp, lm, std::move(nodes_plus), std::move(nodes_minus),
                               cfg.volume_weighting);
            refine = slice.x.rows < cfg.q_dt;  // strict: == q_dt inherits
            center = sol.params;
        }
        row.n_train = slice.x.rows;

        if (refine) {
            const auto folds = level_folds(
                slice.y, cfg.folds, mix_seed(cfg.seed, kStreamFoldBase + static_cast<std::uint64_t>(level)));
            auto tr = tune(slice.x, slice.y, slice.w, folds, cfg.ud,
                           level == depth - 1 ? std::nullopt : center, topts);
            sol = split_solution(slice, std::move(tr.best_model), tr.best_params);
        } else {
            auto model = train(slice.x, slice.y, slice.w, *center, topts.train);
            sol = split_solution(slice, std::move(model), *center);
        }
        row.refined = refine;
        row.log2c_plus = std::log2(sol.params.c_plus);
        row.log2c_minus = std::log2(sol.params.c_minus);
        row.log2gamma = std::log2(sol.params.gamma);
        row.n_sv = sol.model.sv_indices.size();
        row.kappa_val = validation_metrics(sol.model, x_val, y_val).kappa;
        row.seconds = elapsed_seconds(t0);
        result.report.push_back(row);
    }

    // map final support vectors back to rows of the caller's Dataset
    result.params = sol.params;
    std::vector<int> sv_orig;
    for (int nid : sol.sv_nodes_plus) sv_orig.push_back(cls[0].pool_rows[static_cast<std::size_t>(nid)]);
    for (int nid : sol.sv_nodes_minus) sv_orig.push_back(cls[1].pool_rows[static_cast<std::size_t>(nid)]);
    result.model = std::move(sol.model);
    result.model.sv_indices = sv_orig;
    result.sv_train_indices = std::move(sv_orig);
    return result;
}

}  // namespace

MultilevelResult train_multilevel(const Dataset& train, const MultilevelConfig& cfg) {
    return run_engine(train, cfg, false);
}

MultilevelResult train_flat(const Dataset& train, const MultilevelConfig& cfg) {
    return run_engine(train, cfg, true);
}

Metrics predict_final(const TrainedModel& model, const Dataset& test) {
    if (test.n() == 0) throw DomainError("predict_final: empty test set");
    if (test.n_features() > model.n_features)
        throw DomainError("predict_final: dimension mismatch");
    std::vector<int> pred(test.n());
    std::vector<double> x(static_cast<std::size_t>(model.n_features), 0.0);
    for (std::size_t i = 0; i < test.n(); ++i) {
        std::fill(x.begin(), x.end(), 0.0);
        for (const auto& e : test.row(i)) x[static_cast<std::size_t>(e.index)] = e.value;
        pred[i] = model.predict(x);
    }
    return compute_metrics(pred, test.labels());
}

void write_report_csv(const std::vector<LevelReportRow>& report, std::ostream& out,
                      const std::vector<std::pair<std::string, std::string>>& header) {
    for (const auto& [k, v] : header) out << "# " << k << " = " << v << '\n';
    out << "level,n_plus,n_minus,n_train,refined,log2Cplus,log2Cminus,log2gamma,n_sv,"
           "kappa_val,seconds\n";
    char buf[256];
    for (const auto& r : report) {
        std::snprintf(buf, sizeof(buf), "%d,%zu,%zu,%zu,%d,%.6f,%.6f,%.6f,%zu,%.6f,%.3f\n",
                      r.level, r.n_plus, r.n_minus, r.n_train, r.refined ? 1 : 0,
                      r.log2c_plus, r.log2c_minus, r.log2gamma, r.n_sv, r.kappa_val,
                      r.seconds);
        out << buf;
    }
}

}  // namespace mlsvm
