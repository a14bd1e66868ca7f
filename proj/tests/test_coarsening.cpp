#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "mlsvm/coarsening.hpp"
#include "mlsvm/error.hpp"
#include "mlsvm/rng.hpp"

using namespace mlsvm;

namespace {

AffinityGraph path_graph(std::size_t n, double w = 1.0) {
    std::vector<std::tuple<int, int, double>> edges;
    for (std::size_t i = 0; i + 1 < n; ++i)
        edges.emplace_back(static_cast<int>(i), static_cast<int>(i + 1), w);
    return graph_from_edges(n, std::move(edges));
}

AffinityGraph complete_graph(std::size_t n, double w = 1.0) {
    std::vector<std::tuple<int, int, double>> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            edges.emplace_back(static_cast<int>(i), static_cast<int>(j), w);
    return graph_from_edges(n, std::move(edges));
}

Matrix random_points(std::size_t n, std::size_t d, std::uint64_t seed) {
    Matrix m(n, d);
    Rng rng(seed);
    for (auto& v : m.data) v = rng.normal();
    return m;
}

AffinityGraph random_graph(std::size_t n, double density, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::tuple<int, int, double>> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rng.uniform() < density)
                edges.emplace_back(static_cast<int>(i), static_cast<int>(j),
                                   rng.uniform(0.1, 3.0));
    // connect stragglers so every node has a neighbor
    for (std::size_t i = 1; i < n; ++i)
        edges.emplace_back(static_cast<int>(i - 1), static_cast<int>(i), rng.uniform(0.1, 3.0));
    return graph_from_edges(n, std::move(edges));
}

double total_volume(const AffinityGraph& g) {
    return std::accumulate(g.volumes.begin(), g.volumes.end(), 0.0);
}

}  // namespace

TEST_CASE("future volumes on a unit path") {
    const AffinityGraph g = path_graph(3);
    const auto theta = future_volumes(g);
    CHECK(theta[1] == doctest::Approx(3.0).epsilon(1e-12));  // both ends contribute fully
    CHECK(theta[0] == doctest::Approx(1.5).epsilon(1e-12));  // middle splits in half
    CHECK(theta[2] == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("future volumes: two nodes and an isolated node") {
    auto g = graph_from_edges(3, {{0, 1, 1.0}});
    const auto theta = future_volumes(g);
    CHECK(theta[0] == doctest::Approx(2.0));
    CHECK(theta[1] == doctest::Approx(2.0));
    CHECK(theta[2] == doctest::Approx(1.0));  // empty sum
}

TEST_CASE("seed selection on a single node promotes it") {
    AffinityGraph g;
    g.offsets = {0, 0};
    g.volumes = {1.0};
    g.point_refs = {0};
    const auto seeds = select_seeds(g, 0.5, 2.0);
    CHECK(seeds == std::vector<int>{0});
}

TEST_CASE("seed selection keeps one of two equal nodes") {
    const AffinityGraph g = path_graph(2);
    const auto seeds = select_seeds(g, 0.5, 2.0);
    CHECK(seeds == std::vector<int>{0});  // tie broken by lower index; 1 is fully coupled
}

TEST_CASE("seed selection trace on the complete graph K4") {
    const AffinityGraph g = complete_graph(4);
    const auto seeds = select_seeds(g, 0.5, 2.0);
    CHECK(seeds == std::vector<int>{0, 1});  // 2/3 coupling keeps nodes 2 and 3 out
}

TEST_CASE("seed coverage inequality holds after selection") {
    const AffinityGraph g = random_graph(120, 0.05, 17);
    const double q = 0.5;
    const auto seeds = select_seeds(g, q, 2.0);
    const std::set<int> c(seeds.begin(), seeds.end());
    for (std::size_t i = 0; i < g.n_nodes(); ++i) {
        if (c.count(static_cast<int>(i))) continue;
        const auto nbrs = g.neighbors(static_cast<int>(i));
        const auto ws = g.weights(static_cast<int>(i));
        double to_c = 0.0, total = 0.0;
        for (std::size_t p = 0; p < nbrs.size(); ++p) {
            total += ws[p];
            if (c.count(nbrs[p])) to_c += ws[p];
        }
        REQUIRE(total > 0.0);
        CHECK(to_c / total > q);
    }
}

TEST_CASE("interpolation rows follow the weight-proportional rule") {
    // star: node 2 is non-seed with seed neighbors 0 (w=3) and 1 (w=1)
    auto g = graph_from_edges(3, {{0, 2, 3.0}, {1, 2, 1.0}, {0, 1, 0.5}});
    const std::vector<int> seeds{0, 1};

    const auto p2 = build_interpolation(g, seeds, 2);
    REQUIRE(p2.rows[2].size() == 2);
    CHECK(p2.rows[2][0].second == doctest::Approx(0.75));
    CHECK(p2.rows[2][1].second == doctest::Approx(0.25));

    const auto p1 = build_interpolation(g, seeds, 1);
    REQUIRE(p1.rows[2].size() == 1);
    CHECK(p1.rows[2][0].first == 0);  // heaviest seed wins
    CHECK(p1.rows[2][0].second == doctest::Approx(1.0));

    // seed rows are unit rows
    REQUIRE(p2.rows[0].size() == 1);
    CHECK(p2.rows[0][0].second == 1.0);
    CHECK(p2.rows[0][0].first == p2.col_of_seed[0]);
}

TEST_CASE("interpolation rows are row-stochastic with at most R entries") {
    const AffinityGraph g = random_graph(150, 0.08, 3);
    for (int caliber : {1, 2, 4}) {
        const auto seeds = select_seeds(g, 0.5, 2.0);
        const auto p = build_interpolation(g, seeds, caliber);
        for (const auto& row : p.rows) {
            REQUIRE(row.size() >= 1);
            CHECK(row.size() <= static_cast<std::size_t>(caliber));
            double s = 0.0;
            for (const auto& [c, v] : row) s += v;
            CHECK(std::abs(s - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("coarse weights on the split path match the hand trace") {
    Level fine;
    fine.graph = path_graph(3);
    fine.points = Matrix(3, 1);
    fine.points.at(0, 0) = 0.0;
    fine.points.at(1, 0) = 1.0;
    fine.points.at(2, 0) = 2.0;
    InterpolationMatrix p;
    p.n_rows = 3;
    p.n_cols = 2;
    p.rows = {{{0, 1.0}}, {{0, 0.5}, {1, 0.5}}, {{1, 1.0}}};
    p.seed_of_col = {0, 2};
    p.col_of_seed = {0, -1, 1};
    const Level coarse = coarsen_level(fine, p);
    REQUIRE(coarse.graph.n_nodes() == 2);
    REQUIRE(coarse.graph.n_edges() == 1);
    CHECK(coarse.graph.weights(0)[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(coarse.graph.volumes[0] == doctest::Approx(1.5));
    CHECK(coarse.graph.volumes[1] == doctest::Approx(1.5));
    // volume-weighted centroids
    CHECK(coarse.points.at(0, 0) == doctest::Approx(0.5 / 1.5));
    CHECK(coarse.points.at(1, 0) == doctest::Approx(2.5 / 1.5));
}

TEST_CASE("identity interpolation is a fixpoint of coarsening") {
    Level fine;
    fine.graph = random_graph(25, 0.2, 5);
    fine.points = random_points(25, 3, 6);
    const auto p = InterpolationMatrix::identity(25);
    const Level coarse = coarsen_level(fine, p);
    CHECK(coarse.graph.offsets == fine.graph.offsets);
    CHECK(coarse.graph.nbr == fine.graph.nbr);
    for (std::size_t e = 0; e < fine.graph.wgt.size(); ++e)
        CHECK(coarse.graph.wgt[e] == doctest::Approx(fine.graph.wgt[e]).epsilon(1e-12));
    CHECK(coarse.graph.volumes == fine.graph.volumes);
    for (std::size_t i = 0; i < fine.points.data.size(); ++i)
        CHECK(coarse.points.data[i] == doctest::Approx(fine.points.data[i]).epsilon(1e-12));
}

TEST_CASE("coarse weights match the naive triple sum on small graphs") {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
        const std::size_t n = 8 + seed * 5;  // up to 28 nodes
        Level fine;
        fine.graph = random_graph(n, 0.25, seed);
        fine.points = random_points(n, 2, seed + 50);
        const auto seeds = select_seeds(fine.graph, 0.5, 2.0);
        const auto p = build_interpolation(fine.graph, seeds, 2);
        const Level coarse = coarsen_level(fine, p, 0.0);

        // dense fine weight matrix
        std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            const auto nbrs = fine.graph.neighbors(static_cast<int>(i));
            const auto ws = fine.graph.weights(static_cast<int>(i));
            for (std::size_t q = 0; q < nbrs.size(); ++q)
                w[i][static_cast<std::size_t>(nbrs[q])] = ws[q];
        }
        auto p_at = [&](std::size_t row, std::size_t col) {
            for (const auto& [c, v] : p.rows[row])
                if (static_cast<std::size_t>(c) == col) return v;
            return 0.0;
        };
        const std::size_t nc = p.n_cols;
        for (std::size_t a = 0; a < nc; ++a) {
            for (std::size_t b = 0; b < nc; ++b) {
                if (a == b) continue;
                double expect = 0.0;
                for (std::size_t k = 0; k < n; ++k)
                    for (std::size_t l = 0; l < n; ++l)
                        if (k != l) expect += p_at(k, a) * w[k][l] * p_at(l, b);
                double got = 0.0;
                const auto nbrs = coarse.graph.neighbors(static_cast<int>(a));
                const auto ws = coarse.graph.weights(static_cast<int>(a));
                for (std::size_t q = 0; q < nbrs.size(); ++q)
                    if (nbrs[q] == static_cast<int>(b)) got = ws[q];
                CHECK(std::abs(got - expect) <= 1e-12 * std::max(1.0, std::abs(expect)));
            }
        }
    }
}

TEST_CASE("hierarchy stops immediately below the size threshold") {
    const Matrix pts = random_points(300, 4, 9);
    CoarseningConfig cfg;
    cfg.stop_size = 500;
    const auto g = build_knn_graph(pts, 10);
    const auto h = build_hierarchy(g, pts, cfg);
    CHECK(h.depth() == 1);
}

TEST_CASE("hierarchy conserves volume and shrinks strictly") {
    const Matrix pts = random_points(2000, 6, 13);
    CoarseningConfig cfg;
    cfg.stop_size = 100;
    const auto g = build_knn_graph(pts, 10);
    const auto h = build_hierarchy(g, pts, cfg);
    CHECK(h.depth() >= 2);
    const double v0 = total_volume(h.finest().graph);
    CHECK(v0 == doctest::Approx(2000.0));
    for (std::size_t l = 1; l < h.depth(); ++l) {
        const auto& lv = h.levels[l];
        CHECK(lv.graph.n_nodes() < h.levels[l - 1].graph.n_nodes());
        CHECK(std::abs(total_volume(lv.graph) - v0) <= 1e-9 * v0);
        REQUIRE(lv.interp.has_value());
        for (const auto& row : lv.interp->rows) {
            double s = 0.0;
            for (const auto& [c, v] : row) s += v;
            CHECK(std::abs(s - 1.0) <= 1e-12);
        }
    }
    CHECK(h.coarsest().graph.n_nodes() <= 100 * 3);  // allow stall slack
}

TEST_CASE("copied levels pad the small class with identity interpolation") {
    const Matrix pts = random_points(60, 3, 21);
    CoarseningConfig cfg;
    cfg.stop_size = 100;
    auto h = build_hierarchy(build_knn_graph(pts, 5), pts, cfg);
    REQUIRE(h.depth() == 1);
    copy_small_class_levels(h, 4);
    CHECK(h.depth() == 4);
    for (std::size_t l = 1; l < 4; ++l) {
        CHECK(h.levels[l].copied);
        REQUIRE(h.levels[l].interp.has_value());
        CHECK(h.levels[l].interp->is_identity());
        CHECK(h.levels[l].graph.n_nodes() == h.levels[0].graph.n_nodes());
    }
    copy_small_class_levels(h, 4);  // equal depth: unchanged
    CHECK(h.depth() == 4);
    CHECK_THROWS_AS(copy_small_class_levels(h, 2), DomainError);
}

TEST_CASE("hierarchy dump lists levels, volumes and interpolation triplets") {
    const Matrix pts = random_points(400, 3, 41);
    CoarseningConfig cfg;
    cfg.stop_size = 60;
    auto h = build_hierarchy(build_knn_graph(pts, 6), pts, cfg);
    REQUIRE(h.depth() >= 2);
    std::ostringstream out;
    dump_hierarchy(h, out);
    std::istringstream in(out.str());
    std::string word;
    std::size_t levels = 0;
    in >> word >> levels;
    CHECK(word == "levels");
    CHECK(levels == h.depth());
    // second level header carries an interp block with row-count triplets
    const std::string text = out.str();
    CHECK(text.find("interp ") != std::string::npos);
    const auto pos = text.find("interp ");
    std::istringstream ib(text.substr(pos + 7));
    std::size_t rows, cols, nnz;
    ib >> rows >> cols >> nnz;
    CHECK(rows == h.levels[0].graph.n_nodes());
    CHECK(cols == h.levels[1].graph.n_nodes());
    CHECK(nnz >= rows);  // every fine row interpolates from somewhere
}

TEST_CASE("algebraic coarse edges stay symmetric across a hierarchy") {
    const Matrix pts = random_points(800, 4, 33);
    CoarseningConfig cfg;
    cfg.stop_size = 60;
    cfg.coarse_edges = CoarseEdges::Algebraic;
    const auto h = build_hierarchy(build_knn_graph(pts, 8), pts, cfg);
    CHECK(h.depth() >= 2);
    for (const auto& lv : h.levels) {
        const auto& g = lv.graph;
        for (std::size_t i = 0; i < g.n_nodes(); ++i) {
            const auto nbrs = g.neighbors(static_cast<int>(i));
            const auto ws = g.weights(static_cast<int>(i));
            for (std::size_t q = 0; q < nbrs.size(); ++q) {
                const auto back = g.neighbors(nbrs[q]);
                const auto backw = g.weights(nbrs[q]);
                bool found = false;
                for (std::size_t r = 0; r < back.size(); ++r)
                    if (back[r] == static_cast<int>(i)) {
                        found = true;
                        CHECK(backw[r] == ws[q]);
                    }
                CHECK(found);
            }
        }
    }
}
