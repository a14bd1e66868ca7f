#include "mlsvm/knn_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <queue>

#include "mlsvm/error.hpp"
#include "mlsvm/parallel.hpp"
#include "mlsvm/rng.hpp"

namespace mlsvm {

double edge_weight(std::span<const double> xi, std::span<const double> xj) {
    return edge_weight_from_distance(std::sqrt(squared_distance(xi, xj)));
}

namespace {

// (squared distance, index) ordering used everywhere: closer first, ties by
// lower index.
struct Cand {
    double d2;
    int idx;
    bool operator<(const Cand& o) const {
        return d2 != o.d2 ? d2 < o.d2 : idx < o.idx;
    }
};

std::vector<Cand> k_smallest(std::vector<Cand>& cands, int k) {
    const auto kk = std::min<std::size_t>(static_cast<std::size_t>(k), cands.size());
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(kk),
                      cands.end());
    cands.resize(kk);
    return cands;
}

// Random-projection tree forest. Internal nodes split on the median of
// projections onto a random unit direction; queries run a best-first search
// over all trees bounded by a checked-leaf budget.
class RpForest {
public:
    RpForest(const Matrix& pts, const KnnConfig& cfg) : pts_(pts), leaf_size_(cfg.leaf_size) {
        const std::size_t n = pts.rows;
        trees_.resize(static_cast<std::size_t>(cfg.trees));
        for (int t = 0; t < cfg.trees; ++t) {
            Tree& tree = trees_[static_cast<std::size_t>(t)];
            tree.items.resize(n);
            std::iota(tree.items.begin(), tree.items.end(), 0);
            Rng rng(mix_seed(cfg.seed, 0x7e55u + static_cast<std::uint64_t>(t)));
            build(tree, 0, static_cast<int>(n), rng);
        }
    }

    void query(std::span<const double> x, int k, int budget, std::vector<Cand>& out,
               std::vector<int>& visit_mark, int stamp, int self) const {
        // entries: (margin to the unexplored side, tree, node)
        using Entry = std::tuple<double, int, int>;
        std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
        for (std::size_t t = 0; t < trees_.size(); ++t)
            heap.emplace(0.0, static_cast<int>(t), 0);
        out.clear();
        int leaves = 0;
        while (!heap.empty() && leaves < budget) {
            auto [margin, t, node] = heap.top();
            heap.pop();
            const Tree& tree = trees_[static_cast<std::size_t>(t)];
            int cur = node;
            while (tree.nodes[static_cast<std::size_t>(cur)].left >= 0) {
                const Node& nd = tree.nodes[static_cast<std::size_t>(cur)];
                const double proj =
                    dot(x, {tree.dirs.data() + nd.dir_ofs, pts_.cols}) - nd.thresh;
                const int near = proj <= 0.0 ? nd.left : nd.right;
                const int far = proj <= 0.0 ? nd.right : nd.left;
                heap.emplace(std::max(margin, std::abs(proj)), t, far);
                cur = near;
            }
            const Node& leaf = tree.nodes[static_cast<std::size_t>(cur)];
            for (int p = leaf.beg; p < leaf.end; ++p) {
                const int idx = tree.items[static_cast<std::size_t>(p)];
                if (idx == self || visit_mark[static_cast<std::size_t>(idx)] == stamp)
                    continue;
                visit_mark[static_cast<std::size_t>(idx)] = stamp;
                out.push_back({squared_distance(x, pts_.row(static_cast<std::size_t>(idx))),
                               idx});
            }
            ++leaves;
        }
        k_smallest(out, k);
    }

private:
    struct Node {
        int left = -1, right = -1;
        int dir_ofs = -1;
        double thresh = 0.0;
        int beg = 0, end = 0;
    };
    struct Tree {
        std::vector<Node> nodes;
        std::vector<double> dirs;
        std::vector<int> items;
    };

    int build(Tree& tree, int beg, int end, Rng& rng) {
        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        if (end - beg <= leaf_size_) {
            tree.nodes[static_cast<std::size_t>(id)].beg = beg;
            tree.nodes[static_cast<std::size_t>(id)].end = end;
            return id;
        }
        const std::size_t d = pts_.cols;
        const int dir_ofs = static_cast<int>(tree.dirs.size());
        {
            std::vector<double> dir(d);
            double norm = 0.0;
            while (norm == 0.0) {
                for (auto& v : dir) v = rng.normal();
                norm = std::sqrt(dot(dir, dir));
            }
            for (auto& v : dir) v /= norm;
            tree.dirs.insert(tree.dirs.end(), dir.begin(), dir.end());
        }
        std::span<const double> dir{tree.dirs.data() + dir_ofs, d};
        std::vector<double> proj(static_cast<std::size_t>(end - beg));
        for (int p = beg; p < end; ++p)
            proj[static_cast<std::size_t>(p - beg)] =
                dot(dir, pts_.row(static_cast<std::size_t>(tree.items[static_cast<std::size_t>(p)])));
        std::vector<double> sorted = proj;
        const auto midpos = sorted.size() / 2;
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(midpos),
                         sorted.end());
        const double thresh = sorted[midpos];
        auto lo = tree.items.begin() + beg;
        auto hi = tree.items.begin() + end;
        std::vector<int> left, right;
        for (int p = beg; p < end; ++p) {
            const int idx = tree.items[static_cast<std::size_t>(p)];
            (proj[static_cast<std::size_t>(p - beg)] <= thresh ? left : right).push_back(idx);
        }
        // degenerate split (many equal projections): fall back to halving
        if (left.empty() || right.empty()) {
            left.clear();
            right.clear();
            for (int p = beg; p < end; ++p) {
                const int idx = tree.items[static_cast<std::size_t>(p)];
                (p - beg < (end - beg) / 2 ? left : right).push_back(idx);
            }
        }
        std::copy(left.begin(), left.end(), lo);
        std::copy(right.begin(), right.end(), lo + static_cast<std::ptrdiff_t>(left.size()));
        (void)hi;
        const int mid = beg + static_cast<int>(left.size());
        Node& nd = tree.nodes[static_cast<std::size_t>(id)];
        nd.dir_ofs = dir_ofs;
        nd.thresh = thresh;
        const int l = build(tree, beg, mid, rng);
        const int r = build(tree, mid, end, rng);
        tree.nodes[static_cast<std::size_t>(id)].left = l;
        tree.nodes[static_cast<std::size_t>(id)].right = r;
        return id;
    }

    const Matrix& pts_;
    int leaf_size_;
    std::vector<Tree> trees_;
};

}  // namespace

std::vector<std::vector<int>> knn_exact_indices(const Matrix& points, int k, int threads) {
    const std::size_t n = points.rows;
    std::vector<std::vector<int>> nn(n);
    parallel_for(0, n, threads, [&](std::size_t i) {
        std::vector<Cand> cands;
        cands.reserve(n - 1);
        const auto xi = points.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            cands.push_back({squared_distance(xi, points.row(j)), static_cast<int>(j)});
        }
        k_smallest(cands, k);
        nn[i].reserve(cands.size());
        for (const auto& c : cands) nn[i].push_back(c.idx);
    });
    return nn;
}

std::vector<std::vector<int>> knn_approx_indices(const Matrix& points, int k,
                                                 const KnnConfig& cfg) {
    const std::size_t n = points.rows;
    const RpForest forest(points, cfg);
    std::vector<std::vector<int>> nn(n);
    const int nt = resolve_threads(cfg.threads);
    std::vector<std::vector<int>> marks(static_cast<std::size_t>(nt),
                                        std::vector<int>(n, -1));
    parallel_for(0, static_cast<std::size_t>(nt), nt, [&](std::size_t t) {
        std::vector<Cand> cands;
        const std::size_t chunk = (n + static_cast<std::size_t>(nt) - 1) /
                                  static_cast<std::size_t>(nt);
        const std::size_t lo = chunk * t;
        const std::size_t hi = std::min(n, lo + chunk);
        auto& mark = marks[t];
        for (std::size_t i = lo; i < hi; ++i) {
            forest.query(points.row(i), k, cfg.search_leaves, cands, mark,
                         static_cast<int>(i), static_cast<int>(i));
            nn[i].reserve(cands.size());
            for (const auto& c : cands) nn[i].push_back(c.idx);
        }
    });
    return nn;
}

AffinityGraph graph_from_edges(std::size_t n,
                               std::vector<std::tuple<int, int, double>> edges) {
    // normalize to i < j, drop duplicates, then mirror into CSR
    for (auto& [i, j, w] : edges)
        if (i > j) std::swap(i, j);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [](const auto& a, const auto& b) {
                                return std::get<0>(a) == std::get<0>(b) &&
                                       std::get<1>(a) == std::get<1>(b);
                            }),
                edges.end());
    AffinityGraph g;
    g.offsets.assign(n + 1, 0);
    for (const auto& [i, j, w] : edges) {
        if (i == j) throw DomainError("graph_from_edges: self-loop");
        ++g.offsets[static_cast<std::size_t>(i) + 1];
        ++g.offsets[static_cast<std::size_t>(j) + 1];
    }
    for (std::size_t i = 0; i < n; ++i) g.offsets[i + 1] += g.offsets[i];
    g.nbr.resize(g.offsets[n]);
    g.wgt.resize(g.offsets[n]);
    std::vector<std::size_t> cursor(g.offsets.begin(), g.offsets.end() - 1);
    for (const auto& [i, j, w] : edges) {
        g.nbr[cursor[static_cast<std::size_t>(i)]] = j;
        g.wgt[cursor[static_cast<std::size_t>(i)]++] = w;
        g.nbr[cursor[static_cast<std::size_t>(j)]] = i;
        g.wgt[cursor[static_cast<std::size_t>(j)]++] = w;
    }
    g.volumes.assign(n, 1.0);
    g.point_refs.resize(n);
    std::iota(g.point_refs.begin(), g.point_refs.end(), 0);
    return g;
}

AffinityGraph build_knn_graph(const Matrix& points, int k, const KnnConfig& cfg) {
    const std::size_t n = points.rows;
    if (n < 2) throw DomainError("build_knn_graph: need at least 2 points");
    if (k < 1 || static_cast<std::size_t>(k) >= n)
        throw DomainError("build_knn_graph: need 1 <= k < n");

    const bool exact = cfg.mode == KnnMode::Exact ||
                       (cfg.mode == KnnMode::Auto && n < cfg.exact_threshold);
    const auto nn = exact ? knn_exact_indices(points, k, cfg.threads)
                          : knn_approx_indices(points, k, cfg);

    std::vector<std::tuple<int, int, double>> edges;
    edges.reserve(n * static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < n; ++i) {
        for (int j : nn[i]) {
            const double dist = std::sqrt(
                squared_distance(points.row(i), points.row(static_cast<std::size_t>(j))));
            edges.emplace_back(static_cast<int>(i), j, edge_weight_from_distance(dist));
        }
    }
    return graph_from_edges(n, std::move(edges));
}

void dump_graph(const AffinityGraph& g, std::ostream& out) {
    out << g.n_nodes() << ' ' << g.n_edges() << '\n';
    char buf[64];
    for (std::size_t i = 0; i < g.n_nodes(); ++i) {
        const auto nbrs = g.neighbors(static_cast<int>(i));
        const auto ws = g.weights(static_cast<int>(i));
        for (std::size_t p = 0; p < nbrs.size(); ++p) {
            if (static_cast<std::size_t>(nbrs[p]) < i) continue;
            std::snprintf(buf, sizeof(buf), "%zu %d %.17g\n", i, nbrs[p], ws[p]);
            out << buf;
        }
    }
}

}  // namespace mlsvm
