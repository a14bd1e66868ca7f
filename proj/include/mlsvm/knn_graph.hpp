#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <tuple>
#include <vector>

#include "mlsvm/matrix.hpp"

namespace mlsvm {

// Symmetric weighted graph in CSR form with per-node volumes. Finest-level
// volumes are all 1; coarse levels carry aggregate volumes. point_refs maps a
// node back to the row of the data it was built from.
struct AffinityGraph {
    std::vector<std::size_t> offsets;  // n + 1
    std::vector<int> nbr;
    std::vector<double> wgt;
    std::vector<double> volumes;
    std::vector<int> point_refs;

    std::size_t n_nodes() const { return offsets.empty() ? 0 : offsets.size() - 1; }
    std::size_t n_edges() const { return nbr.size() / 2; }

    std::span<const int> neighbors(int i) const {
        return {nbr.data() + offsets[static_cast<std::size_t>(i)],
                nbr.data() + offsets[static_cast<std::size_t>(i) + 1]};
    }
    std::span<const double> weights(int i) const {
        return {wgt.data() + offsets[static_cast<std::size_t>(i)],
                wgt.data() + offsets[static_cast<std::size_t>(i) + 1]};
    }
    double weighted_degree(int i) const {
        double s = 0.0;
        for (double w : weights(i)) s += w;
        return s;
    }
};

// Inverse Euclidean distance, capped at 1/eps_dist for coincident points.
inline constexpr double kEpsDist = 1e-10;

double edge_weight(std::span<const double> xi, std::span<const double> xj);
inline double edge_weight_from_distance(double dist) {
    return 1.0 / (dist > kEpsDist ? dist : kEpsDist);
}

enum class KnnMode { Auto, Exact, Approximate };

struct KnnConfig {
    KnnMode mode = KnnMode::Auto;
    std::size_t exact_threshold = 20000;  // Auto: brute force below this size
    int trees = 8;                        // randomized projection trees
    int leaf_size = 32;
    int search_leaves = 48;               // checked-leaf budget per query
    std::uint64_t seed = 0;
    int threads = 0;
};

// Builds the union-symmetrized k-NN graph; each node keeps edges to its k
// nearest Euclidean neighbors (ties by lower index). Volumes start at 1.
AffinityGraph build_knn_graph(const Matrix& points, int k, const KnnConfig& cfg = {});

// Exact k nearest neighbors of every row (excluding itself), for oracles and
// the approximate-mode recall gate.
std::vector<std::vector<int>> knn_exact_indices(const Matrix& points, int k, int threads = 0);
std::vector<std::vector<int>> knn_approx_indices(const Matrix& points, int k,
                                                 const KnnConfig& cfg);

// Builds a symmetric CSR graph from undirected (i, j, w) triples.
AffinityGraph graph_from_edges(std::size_t n,
                               std::vector<std::tuple<int, int, double>> edges);

// `n_nodes n_edges` header then one `i j w_ij` line per undirected edge.
void dump_graph(const AffinityGraph& g, std::ostream& out);

}  // namespace mlsvm
