#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "radiosem/metrics.hpp"
#include "radiosem/rng.hpp"

using namespace radiosem;

namespace {

GridMap random_map(std::mt19937_64& rng, int w, int h, MapKind kind) {
    std::vector<double> v(static_cast<std::size_t>(w) * h);
    for (auto& x : v) {
        x = kind == MapKind::Binary ? (canonical(rng) < 0.5 ? 0.0 : 1.0)
                                    : canonical(rng);
    }
    return GridMap(w, h, kind, std::move(v));
}

}  // namespace

TEST_CASE("gridmap enforces its invariants") {
    CHECK_THROWS_AS(GridMap(2, 2, MapKind::Binary, {0, 1, 0}), InvalidGrid);
    CHECK_THROWS_AS(GridMap(2, 1, MapKind::Binary, {0.5, 1}), InvalidGrid);
    CHECK_THROWS_AS(GridMap(2, 1, MapKind::Depth, {0.5, 1.5}), InvalidGrid);
    CHECK_THROWS_AS(GridMap(0, 1, MapKind::Depth, {}), InvalidGrid);
    const GridMap g(2, 2, MapKind::NormalizedPower, {0, 0.25, 0.5, 1});
    CHECK(g.at(1, 0) == 0.25);
    CHECK(g.at(0, 1) == 0.5);  // row-major, x = column
}

TEST_CASE("observation sets reject out-of-bounds and duplicate pixels") {
    CHECK_THROWS_AS(SparseObservationSet(4, 4, {{4, 0, -50.0}}), InvalidGrid);
    CHECK_THROWS_AS(SparseObservationSet(4, 4, {{1, 1, -50.0}, {1, 1, -60.0}}),
                    InvalidGrid);
    const SparseObservationSet ok(4, 4, {{0, 0, -50.0}, {1, 1, -60.0}});
    CHECK(ok.size() == 2);
}

TEST_CASE("mse matches hand computations") {
    const GridMap zeros = GridMap::filled(3, 2, MapKind::NormalizedPower, 0.0);
    const GridMap ones = GridMap::filled(3, 2, MapKind::NormalizedPower, 1.0);
    CHECK(mse(zeros, zeros) == 0.0);
    CHECK(mse(zeros, ones) == 1.0);

    const GridMap a(2, 1, MapKind::PowerDbm, {0, 1});
    const GridMap b(2, 1, MapKind::PowerDbm, {1, 3});
    CHECK(mse(a, b) == doctest::Approx(2.5).epsilon(1e-15));

    CHECK_THROWS_AS(mse(zeros, GridMap::filled(2, 3, MapKind::NormalizedPower, 0.0)),
                    DimensionMismatch);
    CHECK_THROWS_AS(mse(zeros, GridMap::filled(3, 2, MapKind::Depth, 0.0)),
                    DimensionMismatch);
}

TEST_CASE("mse is symmetric, non-negative and zero only at equality") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const GridMap a = random_map(rng, 6, 5, MapKind::NormalizedPower);
        const GridMap b = random_map(rng, 6, 5, MapKind::NormalizedPower);
        const double ab = mse(a, b);
        CHECK(ab == mse(b, a));
        CHECK(ab >= 0.0);
        CHECK((ab == 0.0) == (a == b));
    }
}

TEST_CASE("nmse normalizes by reference power") {
    const GridMap ref = GridMap::filled(2, 2, MapKind::NormalizedPower, 1.0);
    CHECK(nmse(ref, ref) == 0.0);
    CHECK(nmse(GridMap::filled(2, 2, MapKind::NormalizedPower, 0.0), ref) == 1.0);

    const GridMap est(2, 1, MapKind::PowerDbm, {2, 2});
    const GridMap one(2, 1, MapKind::PowerDbm, {1, 1});
    CHECK(nmse(est, one) == doctest::Approx(1.0).epsilon(1e-15));

    CHECK_THROWS_AS(nmse(ref, GridMap::filled(2, 2, MapKind::NormalizedPower, 0.0)),
                    ZeroReference);
}

TEST_CASE("nmse of a scaled reference is (k-1)^2") {
    std::mt19937_64 rng(11);
    for (double k : {0.25, 0.5, 2.0, 3.5}) {
        std::vector<double> ref(24), scaled(24);
        for (std::size_t i = 0; i < ref.size(); ++i) {
            ref[i] = 1.0 + canonical(rng) * 10.0;
            scaled[i] = k * ref[i];
        }
        const GridMap r(6, 4, MapKind::PowerDbm, ref);
        const GridMap s(6, 4, MapKind::PowerDbm, scaled);
        CHECK(nmse(s, r) == doctest::Approx((k - 1) * (k - 1)).epsilon(1e-12));
    }
}

TEST_CASE("max_normalize scales the peak to exactly one") {
    const GridMap g(3, 1, MapKind::PowerDbm, {1, 2, 4});
    const GridMap n = max_normalize(g);
    CHECK(n.values() == std::vector<double>{0.25, 0.5, 1.0});
    CHECK(n.kind() == MapKind::NormalizedPower);

    const GridMap c = max_normalize(GridMap::filled(4, 4, MapKind::PowerDbm, 17.0));
    for (double v : c.values()) CHECK(v == 1.0);

    const GridMap spike(2, 2, MapKind::PowerDbm, {0, 0, 10, 0});
    CHECK(max_normalize(spike).values() == std::vector<double>{0, 0, 1, 0});

    CHECK_THROWS_AS(max_normalize(GridMap::filled(2, 2, MapKind::PowerDbm, -3.0)),
                    DegenerateField);
    CHECK_THROWS_AS(max_normalize(GridMap::filled(2, 2, MapKind::Depth, 0.0)),
                    DegenerateField);
}

TEST_CASE("max_normalize is idempotent") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        GridMap g = random_map(rng, 5, 7, MapKind::NormalizedPower);
        if (*std::max_element(g.values().begin(), g.values().end()) == 0.0) continue;
        const GridMap once = max_normalize(g);
        const GridMap twice = max_normalize(once);
        for (std::size_t i = 0; i < once.size(); ++i) {
            CHECK(std::abs(once.values()[i] - twice.values()[i]) <= 1e-15);
        }
    }
}

TEST_CASE("outage_map thresholds strictly below") {
    const GridMap g(2, 1, MapKind::NormalizedPower, {0.2, 0.8});
    CHECK(outage_map(g, 0.5).values() == std::vector<double>{1, 0});
    CHECK(outage_map(g, 0.1).values() == std::vector<double>{0, 0});
    CHECK(outage_map(g, 2.0).values() == std::vector<double>{1, 1});
}

TEST_CASE("outage ones-count is non-decreasing in the threshold") {
    std::mt19937_64 rng(17);
    const GridMap g = random_map(rng, 16, 16, MapKind::NormalizedPower);
    double prev = -1.0;
    for (double t = 0.0; t <= 1.05; t += 0.05) {
        double ones = 0.0;
        for (double v : outage_map(g, t).values()) ones += v;
        CHECK(ones >= prev);
        prev = ones;
    }
}

TEST_CASE("outage_agreement counts matching pixels") {
    const GridMap a(2, 2, MapKind::Binary, {0, 1, 1, 0});
    const GridMap b(2, 2, MapKind::Binary, {1, 0, 0, 1});
    const GridMap c(2, 2, MapKind::Binary, {0, 1, 1, 1});
    CHECK(outage_agreement(a, a) == 1.0);
    CHECK(outage_agreement(a, b) == 0.0);
    CHECK(outage_agreement(a, c) == 0.75);
    CHECK_THROWS_AS(outage_agreement(a, GridMap::filled(2, 2, MapKind::Depth, 0.0)),
                    DimensionMismatch);
    CHECK_THROWS_AS(
        outage_agreement(GridMap::filled(2, 2, MapKind::Depth, 0.0),
                         GridMap::filled(2, 2, MapKind::Depth, 0.0)),
        InvalidGrid);
}

TEST_CASE("outage_agreement of any binary map with itself is one") {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 20; ++trial) {
        const GridMap a = random_map(rng, 9, 4, MapKind::Binary);
        CHECK(outage_agreement(a, a) == 1.0);
    }
}
