#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <set>

#include "radiosem/ldpl.hpp"
#include "radiosem/rng.hpp"

using namespace radiosem;

namespace {

// Independent check: solve the raw 2x2 normal equations by Cramer's rule.
LdplParams normal_equations_oracle(const std::vector<double>& log_d,
                                   const std::vector<double>& pl) {
    double n = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
    for (std::size_t i = 0; i < log_d.size(); ++i) {
        n += 1.0;
        sx += log_d[i];
        sxx += log_d[i] * log_d[i];
        sy += pl[i];
        sxy += log_d[i] * pl[i];
    }
    const double det = n * sxx - sx * sx;
    return {(sy * sxx - sx * sxy) / det, (n * sxy - sx * sy) / det};
}

SparseObservationSet synth_observations(const LdplParams& truth, PixelCoord bs,
                                        const std::vector<PixelCoord>& points,
                                        double tx_power, double sigma,
                                        std::mt19937_64* rng) {
    std::vector<Observation> obs;
    for (const auto& p : points) {
        const double d = std::hypot(p.x - bs.x, p.y - bs.y);
        double pl = eval_path_loss(truth, d);
        if (rng) pl += sigma * gaussian(*rng);
        obs.push_back({p.x, p.y, tx_power - pl});
    }
    return SparseObservationSet(128, 128, std::move(obs));
}

}  // namespace

TEST_CASE("eval_path_loss follows the log-distance law") {
    const LdplParams p{40.0, 20.0};
    CHECK(eval_path_loss(p, 1.0) == 40.0);
    CHECK(eval_path_loss(p, 10.0) == doctest::Approx(60.0).epsilon(1e-15));
    CHECK(eval_path_loss(p, 100.0) == doctest::Approx(80.0).epsilon(1e-15));
    CHECK_THROWS_AS(eval_path_loss(p, 0.0), NonPositiveDistance);
    CHECK_THROWS_AS(eval_path_loss(p, -2.0), NonPositiveDistance);
}

TEST_CASE("eval_path_loss is strictly increasing in distance for positive slope") {
    const LdplParams p{12.0, 28.0};
    double prev = eval_path_loss(p, 0.5);
    for (double d = 1.0; d < 200.0; d *= 1.7) {
        const double cur = eval_path_loss(p, d);
        CHECK(cur > prev);
        prev = cur;
    }
}

TEST_CASE("noise-free fits recover the generating parameters") {
    const LdplParams truth{40.0, 30.0};
    const PixelCoord bs{0, 0};
    const auto obs = synth_observations(truth, bs, {{2, 0}, {0, 5}, {10, 0}, {0, 40}},
                                        0.0, 0.0, nullptr);
    FitConfig cfg;
    cfg.radius = 64.0;
    const LdplParams fit = fit_ldpl(obs, bs, 0.0, cfg);
    CHECK(std::abs(fit.pl0 - truth.pl0) / truth.pl0 <= 1e-9);
    CHECK(std::abs(fit.theta_tilde - truth.theta_tilde) / truth.theta_tilde <= 1e-9);
}

TEST_CASE("noise-free recovery holds for any two distinct distances") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        const LdplParams truth{uniform(rng, 20, 60), uniform(rng, 15, 40)};
        const PixelCoord bs{64, 64};
        std::vector<PixelCoord> pts;
        const int count = 2 + static_cast<int>(bounded(rng, 5));
        for (int i = 0; i < count; ++i) {
            pts.push_back({static_cast<int>(bounded(rng, 128)),
                           static_cast<int>(bounded(rng, 128))});
        }
        // need two distinct distances for a well-posed fit
        std::set<double> dist;
        for (auto& p : pts) dist.insert(std::hypot(p.x - bs.x, p.y - bs.y));
        if (dist.size() < 2 || *dist.begin() < 1.0) continue;
        FitConfig cfg;
        cfg.radius = 256.0;
        cfg.min_samples = 2;
        const auto obs = synth_observations(truth, bs, pts, -10.0, 0.0, nullptr);
        const LdplParams fit = fit_ldpl(obs, bs, -10.0, cfg);
        CHECK(std::abs(fit.pl0 - truth.pl0) <= 1e-9 * std::abs(truth.pl0));
        CHECK(std::abs(fit.theta_tilde - truth.theta_tilde) <=
              1e-9 * std::abs(truth.theta_tilde));
    }
}

TEST_CASE("noisy fits match the closed-form normal-equations oracle") {
    std::mt19937_64 rng(31);
    const LdplParams truth{38.0, 27.0};
    const PixelCoord bs{10, 10};
    std::vector<PixelCoord> pts;
    for (int i = 0; i < 40; ++i) {
        pts.push_back({static_cast<int>(bounded(rng, 100)),
                       static_cast<int>(bounded(rng, 100))});
    }
    const double tx = 5.0;
    const auto obs = synth_observations(truth, bs, pts, tx, 2.0, &rng);
    FitConfig cfg;
    cfg.radius = 30.0;
    const LdplParams fit = fit_ldpl(obs, bs, tx, cfg);

    std::vector<double> xs, ys;
    for (const auto& o : obs.observations()) {
        const double d = std::hypot(o.x - bs.x, o.y - bs.y);
        if (d < cfg.d_min || d > cfg.radius) continue;
        xs.push_back(std::log10(d));
        ys.push_back(tx - o.psd_dbm);
    }
    REQUIRE(xs.size() >= 3);
    const LdplParams oracle = normal_equations_oracle(xs, ys);
    CHECK(std::abs(fit.pl0 - oracle.pl0) <= 1e-12 * std::max(1.0, std::abs(oracle.pl0)));
    CHECK(std::abs(fit.theta_tilde - oracle.theta_tilde) <=
          1e-12 * std::max(1.0, std::abs(oracle.theta_tilde)));
}

TEST_CASE("fit residuals are orthogonal to the regressor") {
    std::mt19937_64 rng(37);
    const LdplParams truth{45.0, 22.0};
    const PixelCoord bs{50, 50};
    std::vector<PixelCoord> pts;
    for (int i = 0; i < 25; ++i) {
        pts.push_back({static_cast<int>(bounded(rng, 100)),
                       static_cast<int>(bounded(rng, 100))});
    }
    const auto obs = synth_observations(truth, bs, pts, 0.0, 3.0, &rng);
    FitConfig cfg;
    cfg.radius = 80.0;
    const LdplParams fit = fit_ldpl(obs, bs, 0.0, cfg);
    double sum_r = 0.0, sum_rx = 0.0;
    for (const auto& o : obs.observations()) {
        const double d = std::hypot(o.x - bs.x, o.y - bs.y);
        if (d < cfg.d_min || d > cfg.radius) continue;
        const double x = std::log10(d);
        const double r = (0.0 - o.psd_dbm) - fit.pl0 - fit.theta_tilde * x;
        sum_r += r;
        sum_rx += r * x;
    }
    CHECK(std::abs(sum_r) <= 1e-9);
    CHECK(std::abs(sum_rx) <= 1e-9);
}

TEST_CASE("samples outside the radius never change the fit") {
    const LdplParams truth{40.0, 25.0};
    const PixelCoord bs{0, 0};
    std::mt19937_64 rng(41);
    const std::vector<PixelCoord> inside = {{3, 0}, {0, 7}, {5, 5}, {9, 1}};
    const auto base = synth_observations(truth, bs, inside, 0.0, 1.0, &rng);
    FitConfig cfg;
    cfg.radius = 15.0;
    const LdplParams fit_a = fit_ldpl(base, bs, 0.0, cfg);

    auto all = base.observations();
    all.push_back({100, 100, -95.0});
    all.push_back({0, 120, -20.0});
    const SparseObservationSet extended(128, 128, all);
    const LdplParams fit_b = fit_ldpl(extended, bs, 0.0, cfg);
    CHECK(fit_a.pl0 == fit_b.pl0);
    CHECK(fit_a.theta_tilde == fit_b.theta_tilde);
}

TEST_CASE("degenerate and undersized sample sets are rejected") {
    const PixelCoord bs{32, 32};
    FitConfig cfg;
    cfg.radius = 50.0;
    // all samples at distance 7 from the BS
    const SparseObservationSet ring(
        64, 64, {{39, 32, -40.0}, {32, 39, -41.0}, {25, 32, -40.5}});
    CHECK_THROWS_AS(fit_ldpl(ring, bs, 0.0, cfg), DegenerateGeometry);
    const SparseObservationSet two(64, 64, {{34, 32, -40.0}, {37, 32, -45.0}});
    CHECK_THROWS_AS(fit_ldpl(two, bs, 0.0, cfg), TooFewSamples);
}

TEST_CASE("multi-BS fitting assigns samples to the nearest transmitter") {
    // Two transmitters with different laws; samples cluster around each.
    const LdplParams pa{40.0, 20.0};
    const LdplParams pb{30.0, 35.0};
    const PixelCoord a{10, 32}, b{54, 32};
    std::vector<Observation> obs;
    for (int i = 2; i <= 12; i += 2) {
        obs.push_back({a.x + i, a.y, -eval_path_loss(pa, i)});
        obs.push_back({b.x - i, b.y + 1, -eval_path_loss(pb, std::hypot(i, 1.0))});
    }
    const SparseObservationSet set(64, 64, obs);
    FitConfig cfg;
    cfg.radius = 20.0;
    const auto fits = fit_ldpl_multi(set, {a, b}, 0.0, cfg);
    REQUIRE(fits.size() == 2);
    CHECK(std::abs(fits[0].pl0 - pa.pl0) <= 1e-9);
    CHECK(std::abs(fits[0].theta_tilde - pa.theta_tilde) <= 1e-9);
    CHECK(std::abs(fits[1].pl0 - pb.pl0) <= 1e-9);
    CHECK(std::abs(fits[1].theta_tilde - pb.theta_tilde) <= 1e-9);
}

TEST_CASE("freespace prediction clamps at the BS and is radially symmetric") {
    const LdplParams p{40.0, 20.0};
    const GridMap g = predict_freespace_map(p, {1, 1}, 3, 3);
    CHECK(g.at(1, 1) == 40.0);  // clamped to d_min = 1
    const double corner = 40.0 + 20.0 * std::log10(std::sqrt(2.0));
    CHECK(g.at(0, 0) == doctest::Approx(corner).epsilon(1e-12));
    CHECK(g.at(2, 2) == doctest::Approx(43.0103).epsilon(1e-5));
    CHECK(g.at(0, 0) == g.at(2, 0));
    CHECK(g.at(0, 0) == g.at(0, 2));
    CHECK(g.at(0, 1) == g.at(2, 1));
}

TEST_CASE("freespace prediction is invariant under 90-degree rotation about the BS") {
    const LdplParams p{33.0, 26.0};
    const int n = 9;
    const GridMap g = predict_freespace_map(p, {4, 4}, n, n);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            // (x, y) -> (4 + (y - 4), 4 - (x - 4))
            const int rx = 4 + (y - 4);
            const int ry = 4 - (x - 4);
            CHECK(g.at(x, y) == doctest::Approx(g.at(rx, ry)).epsilon(1e-12));
        }
    }
}

TEST_CASE("ldpl params round-trip through json") {
    const LdplParams p{41.25, -3.5};
    const LdplParams q = ldpl_params_from_json(to_json(p));
    CHECK(p == q);
    CHECK(to_json(p).find("pl0") != std::string::npos);
    CHECK(to_json(p).find("theta_tilde") != std::string::npos);
}

TEST_CASE("default fit radius is a quarter of the diagonal") {
    const FitConfig cfg = default_fit_config(64, 64);
    CHECK(cfg.radius == doctest::Approx(0.25 * std::hypot(64.0, 64.0)));
    CHECK(cfg.d_min == 1.0);
    CHECK(cfg.min_samples == 3);
}
