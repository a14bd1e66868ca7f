#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "mlsvm/knn_graph.hpp"
#include "mlsvm/matrix.hpp"

namespace mlsvm {

// Sparse row-stochastic interpolation operator P (|V_fine| x |C|). A seed row
// holds a single 1 in its own aggregate column; a non-seed row distributes
// over at most `caliber` seed-neighbor columns.
struct InterpolationMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<std::vector<std::pair<int, double>>> rows;  // (col, value), col-sorted
    std::vector<int> seed_of_col;  // coarse column -> fine seed node
    std::vector<int> col_of_seed;  // fine node -> its column, -1 for non-seeds

    static InterpolationMatrix identity(std::size_t n);
    bool is_identity() const;
    // fine members of aggregate p: rows with P[row, p] > 0
    std::vector<std::vector<int>> columns() const;
};

struct Level {
    AffinityGraph graph;
    Matrix points;
    // interpolation from the next-finer level into this one; absent at the finest
    std::optional<InterpolationMatrix> interp;
    int level_index = 0;
    bool copied = false;
};

struct ClassHierarchy {
    std::vector<Level> levels;  // finest first
    const Level& finest() const { return levels.front(); }
    const Level& coarsest() const { return levels.back(); }
    std::size_t depth() const { return levels.size(); }
};

// How much an aggregate seeded at each node would grow; the seed-selection
// ordering key.
std::vector<double> future_volumes(const AffinityGraph& g);

// Seed selection: eta-outliers on future volume enter C first, then remaining
// nodes in descending recomputed future volume enter C unless already coupled
// to C by more than fraction Q of their total edge weight. Isolated nodes are
// promoted so that every non-seed keeps a seed neighbor. Returns sorted node ids.
std::vector<int> select_seeds(const AffinityGraph& g, double coupling_threshold,
                              double outlier_factor);

InterpolationMatrix build_interpolation(const AffinityGraph& g, const std::vector<int>& seeds,
                                        int caliber);

// Galerkin-style coarse level: adjacency = off-diagonal of P' W P, volumes
// v_c = P' v, points = volume-weighted aggregate centroids. Coarse weights
// below drop_tol are dropped.
Level coarsen_level(const Level& fine, const InterpolationMatrix& P,
                    double drop_tol = 1e-12, bool with_adjacency = true);

enum class CoarseEdges { Knn, Algebraic };

struct CoarseningConfig {
    double coupling_threshold = 0.5;  // Q
    double outlier_factor = 2.0;      // eta
    int caliber = 2;                  // R
    int knn_k = 10;
    std::size_t stop_size = 500;
    int max_levels = 50;
    double stall_fraction = 0.95;  // stop when |C| >= fraction * |V_f|
    CoarseEdges coarse_edges = CoarseEdges::Knn;
    KnnConfig knn;
    double drop_tol = 1e-12;
};

// Repeated select/interpolate/coarsen until the level is small enough. With
// coarse_edges = Knn the coarse adjacency is rebuilt as a fresh k-NN
// inverse-distance graph over the coarse points (volumes kept).
ClassHierarchy build_hierarchy(AffinityGraph g0, Matrix points0, const CoarseningConfig& cfg);

// Pads a bottomed-out small-class hierarchy with copies of its coarsest level
// (identity interpolation) until it has target_depth levels.
void copy_small_class_levels(ClassHierarchy& h, std::size_t target_depth);

void dump_hierarchy(const ClassHierarchy& h, std::ostream& out);

}  // namespace mlsvm
