#include <doctest.h>

#include <set>
#include <sstream>

#include "mlsvm/knn_graph.hpp"
#include "mlsvm/error.hpp"
#include "mlsvm/rng.hpp"

using namespace mlsvm;

namespace {

Matrix gaussian_points(std::size_t n, std::size_t d, std::uint64_t seed) {
    Matrix m(n, d);
    Rng rng(seed);
    for (auto& v : m.data) v = rng.normal();
    return m;
}

bool has_edge(const AffinityGraph& g, int i, int j) {
    for (int t : g.neighbors(i))
        if (t == j) return true;
    return false;
}

}  // namespace

TEST_CASE("edge weights are inverse distances with a coincident-point cap") {
    const std::vector<double> a{0.0, 0.0}, b{2.0, 0.0}, c{0.1, 0.0};
    CHECK(edge_weight(a, b) == doctest::Approx(0.5));
    CHECK(edge_weight(a, c) == doctest::Approx(10.0));
    CHECK(edge_weight(a, a) == doctest::Approx(1e10));
}

TEST_CASE("three collinear points with k=1 give two union edges") {
    Matrix pts(3, 1);
    pts.at(0, 0) = 0.0;
    pts.at(1, 0) = 1.0;
    pts.at(2, 0) = 3.0;
    const AffinityGraph g = build_knn_graph(pts, 1);
    CHECK(g.n_edges() == 2);
    CHECK(has_edge(g, 0, 1));
    CHECK(has_edge(g, 1, 2));
    CHECK_FALSE(has_edge(g, 0, 2));
    CHECK(g.weights(0)[0] == doctest::Approx(1.0));   // distance 1
    CHECK(g.weights(2)[0] == doctest::Approx(0.5));   // distance 2
}

TEST_CASE("two points give a single inverse-distance edge") {
    Matrix pts(2, 2);
    pts.at(1, 0) = 4.0;
    const AffinityGraph g = build_knn_graph(pts, 1);
    CHECK(g.n_edges() == 1);
    CHECK(g.weights(0)[0] == doctest::Approx(0.25));
    CHECK(g.volumes == std::vector<double>{1.0, 1.0});
}

TEST_CASE("duplicate points do not break graph construction") {
    Matrix pts(3, 1);
    pts.at(0, 0) = 1.0;
    pts.at(1, 0) = 1.0;
    pts.at(2, 0) = 5.0;
    const AffinityGraph g = build_knn_graph(pts, 1);
    CHECK(g.weights(0)[0] == doctest::Approx(1e10));
}

TEST_CASE("preconditions are enforced") {
    Matrix one(1, 1);
    CHECK_THROWS_AS(build_knn_graph(one, 1), DomainError);
    Matrix two(2, 1);
    two.at(1, 0) = 1.0;
    CHECK_THROWS_AS(build_knn_graph(two, 2), DomainError);
}

TEST_CASE("exact mode matches the brute-force oracle") {
    const Matrix pts = gaussian_points(300, 5, 11);
    const int k = 7;
    const auto nn = knn_exact_indices(pts, k);
    // quadratic oracle with (distance, index) ordering
    for (std::size_t i = 0; i < pts.rows; ++i) {
        std::vector<std::pair<double, int>> all;
        for (std::size_t j = 0; j < pts.rows; ++j) {
            if (j == i) continue;
            all.emplace_back(squared_distance(pts.row(i), pts.row(j)), static_cast<int>(j));
        }
        std::sort(all.begin(), all.end());
        for (int q = 0; q < k; ++q) CHECK(nn[i][static_cast<std::size_t>(q)] == all[static_cast<std::size_t>(q)].second);
    }
}

TEST_CASE("graph adjacency is symmetric with positive weights and degree >= k") {
    const Matrix pts = gaussian_points(400, 6, 23);
    const int k = 5;
    const AffinityGraph g = build_knn_graph(pts, k);
    for (std::size_t i = 0; i < g.n_nodes(); ++i) {
        const auto nbrs = g.neighbors(static_cast<int>(i));
        CHECK(nbrs.size() >= static_cast<std::size_t>(k));
        const auto ws = g.weights(static_cast<int>(i));
        for (std::size_t p = 0; p < nbrs.size(); ++p) {
            CHECK(nbrs[p] != static_cast<int>(i));  // no self-loops
            CHECK(ws[p] > 0.0);
            // mirrored edge carries the identical weight
            const auto back = g.neighbors(nbrs[p]);
            const auto backw = g.weights(nbrs[p]);
            bool found = false;
            for (std::size_t q = 0; q < back.size(); ++q) {
                if (back[q] == static_cast<int>(i)) {
                    CHECK(backw[q] == ws[p]);
                    found = true;
                }
            }
            CHECK(found);
        }
    }
}

TEST_CASE("approximate mode reaches 0.9 recall on gaussian data") {
    const Matrix pts = gaussian_points(4000, 10, 31);
    const int k = 10;
    const auto exact = knn_exact_indices(pts, k);
    KnnConfig cfg;
    cfg.seed = 5;
    const auto approx = knn_approx_indices(pts, k, cfg);
    std::size_t hits = 0, total = 0;
    for (std::size_t i = 0; i < pts.rows; ++i) {
        const std::set<int> truth(exact[i].begin(), exact[i].end());
        for (int j : approx[i]) hits += truth.count(j);
        total += truth.size();
    }
    const double recall = static_cast<double>(hits) / static_cast<double>(total);
    CHECK(recall >= 0.9);
}

TEST_CASE("graph dump emits header plus one line per edge") {
    Matrix pts(3, 1);
    pts.at(0, 0) = 0.0;
    pts.at(1, 0) = 1.0;
    pts.at(2, 0) = 3.0;
    const AffinityGraph g = build_knn_graph(pts, 1);
    std::ostringstream out;
    dump_graph(g, out);
    std::istringstream in(out.str());
    std::size_t n_nodes, n_edges;
    in >> n_nodes >> n_edges;
    CHECK(n_nodes == 3);
    CHECK(n_edges == 2);
    std::size_t lines = 0;
    int a, b;
    double w;
    while (in >> a >> b >> w) {
        CHECK(a < b);
        CHECK(w > 0.0);
        ++lines;
    }
    CHECK(lines == n_edges);
}
