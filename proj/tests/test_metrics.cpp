#include <doctest.h>

#include <cmath>

#include "mlsvm/metrics.hpp"
#include "mlsvm/error.hpp"
#include "mlsvm/rng.hpp"

using namespace mlsvm;

TEST_CASE("hand-checked confusion counts") {
    const Metrics m = metrics_from_counts(9, 80, 10, 1);
    CHECK(m.sn == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(m.sp == doctest::Approx(80.0 / 90.0).epsilon(1e-12));
    CHECK(m.acc == doctest::Approx(0.89).epsilon(1e-12));
    CHECK(m.kappa == doctest::Approx(0.8944271909999159).epsilon(1e-9));
}

TEST_CASE("perfect prediction scores one everywhere") {
    const std::vector<int> y{+1, -1, +1, -1, -1};
    const Metrics m = compute_metrics(y, y);
    CHECK(m.sn == 1.0);
    CHECK(m.sp == 1.0);
    CHECK(m.acc == 1.0);
    CHECK(m.kappa == 1.0);
}

TEST_CASE("all-majority prediction zeroes sensitivity and kappa") {
    const std::vector<int> actual{+1, +1, -1, -1, -1};
    const std::vector<int> pred{-1, -1, -1, -1, -1};
    const Metrics m = compute_metrics(pred, actual);
    CHECK(m.sn == 0.0);
    CHECK(m.kappa == 0.0);
    CHECK(m.sp == 1.0);
}

TEST_CASE("zero denominators report zero and clear the flag") {
    const std::vector<int> actual{-1, -1};
    const std::vector<int> pred{-1, +1};
    const Metrics m = compute_metrics(pred, actual);
    CHECK_FALSE(m.sn_defined);
    CHECK(m.sn == 0.0);
    CHECK(m.kappa == 0.0);
}

TEST_CASE("length mismatch is rejected") {
    CHECK_THROWS_AS(compute_metrics({+1}, {+1, -1}), DomainError);
}

TEST_CASE("kappa squared equals SN times SP over random confusion counts") {
    Rng rng(4242);
    for (int t = 0; t < 1000; ++t) {
        const auto tp = static_cast<std::size_t>(rng.uniform_int(0, 500));
        const auto tn = static_cast<std::size_t>(rng.uniform_int(0, 500));
        const auto fp = static_cast<std::size_t>(rng.uniform_int(0, 500));
        const auto fn = static_cast<std::size_t>(rng.uniform_int(0, 500));
        if (tp + tn + fp + fn == 0) continue;
        const Metrics m = metrics_from_counts(tp, tn, fp, fn);
        CHECK(std::abs(m.kappa * m.kappa - m.sn * m.sp) <= 1e-12);
        const double acc = static_cast<double>(tp + tn) / static_cast<double>(tp + tn + fp + fn);
        CHECK(std::abs(m.acc - acc) <= 1e-12);
    }
}
