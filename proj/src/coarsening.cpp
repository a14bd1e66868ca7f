#include "mlsvm/coarsening.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <ostream>

#include "mlsvm/error.hpp"

namespace mlsvm {

InterpolationMatrix InterpolationMatrix::identity(std::size_t n) {
    InterpolationMatrix p;
    p.n_rows = p.n_cols = n;
    p.rows.resize(n);
    p.seed_of_col.resize(n);
    p.col_of_seed.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        p.rows[i] = {{static_cast<int>(i), 1.0}};
        p.seed_of_col[i] = static_cast<int>(i);
        p.col_of_seed[i] = static_cast<int>(i);
    }
    return p;
}

bool InterpolationMatrix::is_identity() const {
    if (n_rows != n_cols) return false;
    for (std::size_t i = 0; i < n_rows; ++i)
        if (rows[i].size() != 1 || rows[i][0].first != static_cast<int>(i) ||
            rows[i][0].second != 1.0)
            return false;
    return true;
}

std::vector<std::vector<int>> InterpolationMatrix::columns() const {
    std::vector<std::vector<int>> cols(n_cols);
    for (std::size_t i = 0; i < n_rows; ++i)
        for (const auto& [c, v] : rows[i])
            if (v > 0.0) cols[static_cast<std::size_t>(c)].push_back(static_cast<int>(i));
    return cols;
}

namespace {

// theta_i = v_i + sum_{j in F} v_j * w_ji / deg_j, with deg_j the total edge
// weight of j over the whole level. Isolated j contribute nothing.
std::vector<double> future_volumes_over(const AffinityGraph& g,
                                        const std::vector<char>& in_f) {
    const std::size_t n = g.n_nodes();
    std::vector<double> deg(n);
    for (std::size_t j = 0; j < n; ++j) deg[j] = g.weighted_degree(static_cast<int>(j));
    std::vector<double> theta(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = g.volumes[i];
        const auto nbrs = g.neighbors(static_cast<int>(i));
        const auto ws = g.weights(static_cast<int>(i));
        for (std::size_t p = 0; p < nbrs.size(); ++p) {
            const auto j = static_cast<std::size_t>(nbrs[p]);
            if (!in_f[j] || deg[j] <= 0.0) continue;
            s += g.volumes[j] * ws[p] / deg[j];
        }
        theta[i] = s;
    }
    return theta;
}

}  // namespace

std::vector<double> future_volumes(const AffinityGraph& g) {
    return future_volumes_over(g, std::vector<char>(g.n_nodes(), 1));
}

std::vector<int> select_seeds(const AffinityGraph& g, double coupling_threshold,
                              double outlier_factor) {
    const std::size_t n = g.n_nodes();
    if (n == 0) throw DomainError("select_seeds: empty graph");
    if (!(coupling_threshold > 0.0 && coupling_threshold < 1.0))
        throw DomainError("select_seeds: Q must lie in (0, 1)");
    if (!(outlier_factor > 0.0)) throw DomainError("select_seeds: eta must be positive");

    std::vector<char> in_f(n, 1);
    auto theta = future_volumes_over(g, in_f);
    const double mean =
        std::accumulate(theta.begin(), theta.end(), 0.0) / static_cast<double>(n);

    std::vector<char> in_c(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (theta[i] > outlier_factor * mean) {
            in_c[i] = 1;
            in_f[i] = 0;
        }
    }

    theta = future_volumes_over(g, in_f);

    std::vector<int> order;
    for (std::size_t i = 0; i < n; ++i)
        if (in_f[i]) order.push_back(static_cast<int>(i));
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double ta = theta[static_cast<std::size_t>(a)];
        const double tb = theta[static_cast<std::size_t>(b)];
        return ta != tb ? ta > tb : a < b;
    });

    for (int i : order) {
        const auto ii = static_cast<std::size_t>(i);
        const double total = g.weighted_degree(i);
        if (total <= 0.0) {  // isolated: promote, nothing to interpolate from
            in_c[ii] = 1;
            in_f[ii] = 0;
            continue;
        }
        double to_c = 0.0;
        const auto nbrs = g.neighbors(i);
        const auto ws = g.weights(i);
        for (std::size_t p = 0; p < nbrs.size(); ++p)
            if (in_c[static_cast<std::size_t>(nbrs[p])]) to_c += ws[p];
        if (to_c / total <= coupling_threshold) {
            in_c[ii] = 1;
            in_f[ii] = 0;
        }
    }

    std::vector<int> seeds;
    for (std::size_t i = 0; i < n; ++i)
        if (in_c[i]) seeds.push_back(static_cast<int>(i));
    return seeds;
}

InterpolationMatrix build_interpolation(const AffinityGraph& g, const std::vector<int>& seeds,
                                        int caliber) {
    if (caliber < 1) throw DomainError("build_interpolation: caliber must be >= 1");
    const std::size_t n = g.n_nodes();
    InterpolationMatrix p;
    p.n_rows = n;
    p.n_cols = seeds.size();
    p.rows.resize(n);
    p.seed_of_col = seeds;
    p.col_of_seed.assign(n, -1);
    for (std::size_t c = 0; c < seeds.size(); ++c)
        p.col_of_seed[static_cast<std::size_t>(seeds[c])] = static_cast<int>(c);

    for (std::size_t i = 0; i < n; ++i) {
        const int col = p.col_of_seed[i];
        if (col >= 0) {
            p.rows[i] = {{col, 1.0}};
            continue;
        }
        // seed neighbors, heaviest first (ties by lower node index)
        std::vector<std::pair<double, int>> cand;  // (weight, seed column)
        const auto nbrs = g.neighbors(static_cast<int>(i));
        const auto ws = g.weights(static_cast<int>(i));
        for (std::size_t q = 0; q < nbrs.size(); ++q) {
            const int sc = p.col_of_seed[static_cast<std::size_t>(nbrs[q])];
            if (sc >= 0) cand.emplace_back(ws[q], nbrs[q]);
        }
        if (cand.empty())
            throw DomainError("build_interpolation: non-seed node without seed neighbor");
        std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        if (cand.size() > static_cast<std::size_t>(caliber))
            cand.resize(static_cast<std::size_t>(caliber));
        double total = 0.0;
        for (const auto& [w, node] : cand) total += w;
        auto& row = p.rows[i];
        for (const auto& [w, node] : cand)
            row.emplace_back(p.col_of_seed[static_cast<std::size_t>(node)], w / total);
        std::sort(row.begin(), row.end());
    }
    return p;
}

Level coarsen_level(const Level& fine, const InterpolationMatrix& P, double drop_tol,
                    bool with_adjacency) {
    const AffinityGraph& gf = fine.graph;
    const std::size_t nf = gf.n_nodes();
    const std::size_t nc = P.n_cols;
    if (P.n_rows != nf) throw DomainError("coarsen_level: interpolation shape mismatch");

    // W_coarse = P' W P restricted to off-diagonal entries; the fine diagonal
    // is zero, so the k != l restriction is automatic.
    std::vector<std::tuple<int, int, double>> edges;
    if (with_adjacency) {
        std::map<std::pair<int, int>, double> acc;
        for (std::size_t k = 0; k < nf; ++k) {
            const auto nbrs = gf.neighbors(static_cast<int>(k));
            const auto ws = gf.weights(static_cast<int>(k));
            for (std::size_t e = 0; e < nbrs.size(); ++e) {
                const auto l = static_cast<std::size_t>(nbrs[e]);
                if (l < k) continue;  // each undirected fine edge once
                const double w = ws[e];
                for (const auto& [ci, pi] : P.rows[k]) {
                    for (const auto& [cj, pj] : P.rows[l]) {
                        if (ci == cj) continue;
                        const int a = std::min(ci, cj);
                        const int b = std::max(ci, cj);
                        acc[{a, b}] += w * pi * pj;
                    }
                }
            }
        }
        edges.reserve(acc.size());
        for (const auto& [key, w] : acc)
            if (w >= drop_tol) edges.emplace_back(key.first, key.second, w);
    }

    Level coarse;
    coarse.graph = graph_from_edges(nc, std::move(edges));
    coarse.level_index = fine.level_index + 1;

    // volumes and volume-weighted centroid points
    std::vector<double>& vols = coarse.graph.volumes;
    vols.assign(nc, 0.0);
    const std::size_t d = fine.points.cols;
    coarse.points = Matrix(nc, d);
    for (std::size_t j = 0; j < nf; ++j) {
        const double vj = gf.volumes[j];
        const auto xj = fine.points.row(j);
        for (const auto& [c, pv] : P.rows[j]) {
            const double m = vj * pv;
            vols[static_cast<std::size_t>(c)] += m;
            auto xc = coarse.points.row(static_cast<std::size_t>(c));
            for (std::size_t t = 0; t < d; ++t) xc[t] += m * xj[t];
        }
    }
    for (std::size_t c = 0; c < nc; ++c) {
        if (vols[c] <= 0.0) throw DomainError("coarsen_level: empty aggregate");
        auto xc = coarse.points.row(c);
        for (std::size_t t = 0; t < d; ++t) xc[t] /= vols[c];
    }
    coarse.graph.point_refs.resize(nc);
    std::iota(coarse.graph.point_refs.begin(), coarse.graph.point_refs.end(), 0);
    coarse.interp = P;
    return coarse;
}

ClassHierarchy build_hierarchy(AffinityGraph g0, Matrix points0, const CoarseningConfig& cfg) {
    if (cfg.stop_size < 2) throw DomainError("build_hierarchy: stop_size must be >= 2");
    ClassHierarchy h;
    {
        Level finest;
        finest.graph = std::move(g0);
        finest.points = std::move(points0);
        finest.level_index = 0;
        h.levels.push_back(std::move(finest));
    }
    while (true) {
        const Level& cur = h.levels.back();
        const std::size_t n = cur.graph.n_nodes();
        if (n <= cfg.stop_size) break;
        if (h.levels.size() > static_cast<std::size_t>(cfg.max_levels)) break;

        const auto seeds =
            select_seeds(cur.graph, cfg.coupling_threshold, cfg.outlier_factor);
        if (static_cast<double>(seeds.size()) >=
            cfg.stall_fraction * static_cast<double>(n))
            break;  // coarsening stalled

        const auto P = build_interpolation(cur.graph, seeds, cfg.caliber);
        const bool algebraic = cfg.coarse_edges == CoarseEdges::Algebraic;
        Level coarse = coarsen_level(cur, P, cfg.drop_tol, algebraic);

        if (!algebraic && coarse.graph.n_nodes() >= 2) {
            const std::size_t nc = coarse.graph.n_nodes();
            const int k = std::min<int>(cfg.knn_k, static_cast<int>(nc) - 1);
            AffinityGraph rewired = build_knn_graph(coarse.points, k, cfg.knn);
            rewired.volumes = coarse.graph.volumes;  // keep aggregate volumes
            coarse.graph = std::move(rewired);
        }
        h.levels.push_back(std::move(coarse));
    }
    return h;
}

void copy_small_class_levels(ClassHierarchy& h, std::size_t target_depth) {
    if (target_depth < h.depth())
        throw DomainError("copy_small_class_levels: target depth below current depth");
    while (h.depth() < target_depth) {
        Level copy;
        copy.graph = h.levels.back().graph;
        copy.points = h.levels.back().points;
        copy.interp = InterpolationMatrix::identity(copy.graph.n_nodes());
        copy.level_index = h.levels.back().level_index + 1;
        copy.copied = true;
        h.levels.push_back(std::move(copy));
    }
}

void dump_hierarchy(const ClassHierarchy& h, std::ostream& out) {
    char buf[96];
    out << "levels " << h.depth() << '\n';
    for (const Level& lv : h.levels) {
        const auto& g = lv.graph;
        out << "level " << lv.level_index << " nodes " << g.n_nodes() << " edges "
            << g.n_edges() << (lv.copied ? " copied" : "") << '\n';
        out << "volumes";
        for (double v : g.volumes) {
            std::snprintf(buf, sizeof(buf), " %.17g", v);
            out << buf;
        }
        out << '\n';
        dump_graph(g, out);
        if (lv.interp) {
            const auto& P = *lv.interp;
            std::size_t nnz = 0;
            for (const auto& row : P.rows) nnz += row.size();
            out << "interp " << P.n_rows << ' ' << P.n_cols << ' ' << nnz << '\n';
            for (std::size_t i = 0; i < P.n_rows; ++i)
                for (const auto& [c, v] : P.rows[i]) {
                    std::snprintf(buf, sizeof(buf), "%zu %d %.17g\n", i, c, v);
                    out << buf;
                }
        }
    }
}

}  // namespace mlsvm
