#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "radiosem/genmodel.hpp"
#include "radiosem/harness.hpp"
#include "radiosem/rng.hpp"

using namespace radiosem;

namespace {

FeatureStack random_features(std::mt19937_64& rng, int n) {
    std::vector<double> b(static_cast<std::size_t>(n) * n), t(b.size()), d(b.size());
    for (auto& v : b) v = canonical(rng) < 0.2 ? 1.0 : 0.0;
    for (auto& v : t) v = 0.0;
    t[bounded(rng, t.size())] = 1.0;
    for (auto& v : d) v = canonical(rng);
    return FeatureStack(GridMap(n, n, MapKind::Binary, std::move(b)),
                        GridMap(n, n, MapKind::Binary, std::move(t)),
                        GridMap(n, n, MapKind::Depth, std::move(d)));
}

GridMap random_target(std::mt19937_64& rng, int n) {
    std::vector<double> v(static_cast<std::size_t>(n) * n);
    for (auto& x : v) x = canonical(rng);
    return GridMap(n, n, MapKind::NormalizedPower, std::move(v));
}

TrainSample random_sample(std::mt19937_64& rng, int n) {
    return TrainSample{random_features(rng, n), random_target(rng, n)};
}

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({1e-6, std::abs(a), std::abs(b)});
}

}  // namespace

TEST_CASE("layout parameter counts match the architecture") {
    CHECK(generator_layout(3).param_count() == 448 + 4640 + 9248 + 4624 + 145);
    CHECK(discriminator_layout(4).param_count() == 592 + 4640 + 33);
    CHECK(generator_layout(3) == generator_layout(3));
    CHECK(!(generator_layout(3) == generator_layout(5)));
}

TEST_CASE("generator output has the input shape and sigmoid range") {
    std::mt19937_64 rng(151);
    const ModelParams gen = init_params(generator_layout(3), 42);
    for (int n : {16, 32}) {
        const FeatureStack f = random_features(rng, n);
        const GridMap y = generator_forward(gen, f);
        CHECK(y.width() == n);
        CHECK(y.height() == n);
        CHECK(y.kind() == MapKind::NormalizedPower);
        for (double v : y.values()) {
            CHECK(v > 0.0);
            CHECK(v < 1.0);
        }
    }
}

TEST_CASE("all-zero parameters produce the sigmoid midpoint") {
    std::mt19937_64 rng(157);
    const FeatureStack f = random_features(rng, 16);
    ModelParams gen{generator_layout(3),
                    std::vector<double>(generator_layout(3).param_count(), 0.0)};
    const GridMap y = generator_forward(gen, f);
    for (double v : y.values()) CHECK(v == 0.5);

    ModelParams disc{discriminator_layout(4),
                     std::vector<double>(discriminator_layout(4).param_count(), 0.0)};
    CHECK(discriminator_forward(disc, y, f) == 0.5);
}

TEST_CASE("every parameter is alive at random init") {
    std::mt19937_64 rng(163);
    const FeatureStack f = random_features(rng, 16);
    ModelParams gen = init_params(generator_layout(3), 7);
    const GridMap base = generator_forward(gen, f);
    // spot-check a sample of parameters across all layers
    for (std::size_t i = 0; i < gen.values.size(); i += 977) {
        ModelParams nudged = gen;
        nudged.values[i] += 0.05;
        const GridMap out = generator_forward(nudged, f);
        double delta = 0.0;
        for (std::size_t k = 0; k < out.size(); ++k) {
            delta = std::max(delta, std::abs(out.values()[k] - base.values()[k]));
        }
        CHECK(delta > 0.0);
    }
}

TEST_CASE("discriminator stays in (0,1) and treats samples independently") {
    std::mt19937_64 rng(167);
    const ModelParams disc = init_params(discriminator_layout(4), 21);
    const FeatureStack f1 = random_features(rng, 16);
    const FeatureStack f2 = random_features(rng, 16);
    const GridMap y1 = random_target(rng, 16);
    const GridMap y2 = random_target(rng, 16);
    const double a1 = discriminator_forward(disc, y1, f1);
    const double b1 = discriminator_forward(disc, y2, f2);
    // reversed evaluation order cannot change per-sample outputs
    const double b2 = discriminator_forward(disc, y2, f2);
    const double a2 = discriminator_forward(disc, y1, f1);
    CHECK(a1 == a2);
    CHECK(b1 == b2);
    for (double v : {a1, b1}) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("loss values match hand arithmetic") {
    const GridMap y = GridMap::filled(4, 4, MapKind::NormalizedPower, 0.5);
    CHECK(generator_loss(0.7, y, y, 0.0) == 0.0);
    CHECK(generator_loss(0.5, y, y, 1.0) ==
          doctest::Approx(std::log(0.5)).epsilon(1e-12));

    const GridMap y2 = GridMap::filled(4, 4, MapKind::NormalizedPower, 0.5 + std::sqrt(0.02));
    CHECK(generator_loss(0.5, y2, y, 0.01) == doctest::Approx(0.013069).epsilon(1e-4));

    CHECK(discriminator_loss(1.0 - 1e-12, 1e-12) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(discriminator_loss(0.5, 0.5) == doctest::Approx(1.3863).epsilon(1e-4));
    CHECK(discriminator_loss(0.9, 0.2) == doctest::Approx(0.3285).epsilon(1e-4));
}

TEST_CASE("generator loss is affine in alpha at a fixed forward pass") {
    std::mt19937_64 rng(173);
    const GridMap y_hat = random_target(rng, 8);
    const GridMap y = random_target(rng, 8);
    const double d_fake = 0.37;
    const double l0 = generator_loss(d_fake, y_hat, y, 0.0);
    const double l1 = generator_loss(d_fake, y_hat, y, 1.0);
    for (double alpha : {0.25, 0.5, 2.0, 7.5}) {
        CHECK(generator_loss(d_fake, y_hat, y, alpha) ==
              doctest::Approx(l0 + alpha * (l1 - l0)).epsilon(1e-12));
    }
}

TEST_CASE("analytic gradients match central finite differences") {
    std::mt19937_64 rng(179);
    const TrainSample sample = random_sample(rng, 16);
    ModelParams gen = init_params(generator_layout(3), 1001);
    ModelParams disc = init_params(discriminator_layout(4), 1002);
    const double alpha = 0.05;
    const double eps = 1e-4;

    const GanSampleGrads g = gan_sample_grads(gen, disc, sample, alpha, true, true);
    const auto loss_gen = [&](const ModelParams& gp) {
        const GanSampleGrads r = gan_sample_grads(gp, disc, sample, alpha, false, false);
        return alpha * r.loss_g_adv + r.loss_mse;
    };
    const auto loss_disc = [&](const ModelParams& dp) {
        return gan_sample_grads(gen, dp, sample, alpha, false, false).loss_d;
    };

    double max_rel = 0.0;
    std::mt19937_64 pick(181);
    for (int probe = 0; probe < 120; ++probe) {
        const std::size_t i = bounded(pick, gen.values.size());
        ModelParams plus = gen, minus = gen;
        plus.values[i] += eps;
        minus.values[i] -= eps;
        const double fd = (loss_gen(plus) - loss_gen(minus)) / (2 * eps);
        max_rel = std::max(max_rel, rel_err(fd, g.gen_grads[i]));
    }
    for (int probe = 0; probe < 120; ++probe) {
        const std::size_t i = bounded(pick, disc.values.size());
        ModelParams plus = disc, minus = disc;
        plus.values[i] += eps;
        minus.values[i] -= eps;
        const double fd = (loss_disc(plus) - loss_disc(minus)) / (2 * eps);
        max_rel = std::max(max_rel, rel_err(fd, g.disc_grads[i]));
    }
    CHECK(max_rel <= 1e-3);
}

TEST_CASE("perfect reconstruction with alpha=0 gives a zero generator gradient") {
    std::mt19937_64 rng(191);
    const FeatureStack f = random_features(rng, 16);
    const ModelParams gen = init_params(generator_layout(3), 500);
    const ModelParams disc = init_params(discriminator_layout(4), 501);
    const GridMap y_hat = generator_forward(gen, f);
    const TrainSample sample{f, y_hat};  // target equals the current output
    const GanSampleGrads g = gan_sample_grads(gen, disc, sample, 0.0, true, false);
    CHECK(g.loss_mse == 0.0);
    for (double v : g.gen_grads) CHECK(v == 0.0);
}

TEST_CASE("adam fixed points and step-one magnitude") {
    std::vector<double> params{1.0, -2.0, 3.0};
    AdamState state;
    adam_step(params, std::vector<double>{0, 0, 0}, state, 0.01);
    CHECK(params == std::vector<double>{1.0, -2.0, 3.0});

    // first bias-corrected step moves by ~lr in the gradient's sign
    for (double g0 : {1e-4, 0.5, 40.0}) {
        std::vector<double> p{0.0};
        AdamState s;
        adam_step(p, std::vector<double>{g0}, s, 0.01);
        CHECK(p[0] == doctest::Approx(-0.01).epsilon(1e-3));
    }
    std::vector<double> p{0.0};
    AdamState s;
    CHECK_THROWS_AS(adam_step(p, std::vector<double>{1.0, 2.0}, s, 0.01), ShapeMismatch);
}

TEST_CASE("training is deterministic and epochs=0 is the identity") {
    std::mt19937_64 rng(193);
    std::vector<TrainSample> data;
    for (int i = 0; i < 6; ++i) data.push_back(random_sample(rng, 16));

    TrainConfig cfg;
    cfg.epochs = 0;
    cfg.seed = 7;
    const TrainResult frozen = train(data, cfg);
    CHECK(frozen.history.empty());
    CHECK(frozen.generator.values == init_params(generator_layout(3), mix_seed(7, 1)).values);

    cfg.epochs = 2;
    cfg.batch = 3;
    cfg.lr = 1e-3;
    const TrainResult a = train(data, cfg);
    const TrainResult b = train(data, cfg);
    CHECK(a.generator.values == b.generator.values);
    CHECK(a.discriminator.values == b.discriminator.values);
    REQUIRE(a.history.size() == 2);
    CHECK(a.history[0].loss_mse == b.history[0].loss_mse);
}

TEST_CASE("thread count does not change the result") {
    std::mt19937_64 rng(197);
    std::vector<TrainSample> data;
    for (int i = 0; i < 5; ++i) data.push_back(random_sample(rng, 16));
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch = 5;
    cfg.lr = 1e-3;
    cfg.seed = 3;
    TrainConfig cfg2 = cfg;
    cfg2.threads = 2;
    const TrainResult a = train(data, cfg);
    const TrainResult b = train(data, cfg2);
    CHECK(a.generator.values == b.generator.values);
    CHECK(a.discriminator.values == b.discriminator.values);
}

TEST_CASE("alpha=0 training equals the discriminator-free trainer") {
    std::mt19937_64 rng(199);
    std::vector<TrainSample> data;
    for (int i = 0; i < 4; ++i) data.push_back(random_sample(rng, 16));

    TrainConfig with_d;
    with_d.epochs = 3;
    with_d.batch = 2;
    with_d.alpha = 0.0;
    with_d.lr = 1e-3;
    with_d.seed = 11;
    TrainConfig without_d = with_d;
    without_d.train_discriminator = false;

    const TrainResult a = train(data, with_d);
    const TrainResult b = train(data, without_d);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t e = 0; e < a.history.size(); ++e) {
        CHECK(std::abs(a.history[e].loss_mse - b.history[e].loss_mse) <= 1e-12);
    }
    CHECK(a.generator.values == b.generator.values);
}

TEST_CASE("a short run actually reduces the reconstruction loss") {
    std::vector<Scene> scenes;
    for (int i = 0; i < 8; ++i) {
        SceneConfig sc;
        sc.width = sc.height = 16;
        sc.n_buildings = 2;
        sc.building_min = 2;
        sc.building_max = 5;
        sc.seed = 900 + i;
        scenes.push_back(generate_scene(sc));
    }
    const auto data = build_dataset(scenes, 16);
    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.batch = 8;
    cfg.lr = 1e-3;
    cfg.seed = 5;
    const TrainResult r = train(data, cfg);
    CHECK(r.history.back().loss_mse < r.history.front().loss_mse);
}

TEST_CASE("training rejects bad inputs and non-finite parameters") {
    CHECK_THROWS_AS(train({}, TrainConfig{}), EmptyDataset);

    std::mt19937_64 rng(211);
    std::vector<TrainSample> data{random_sample(rng, 16)};
    ModelParams gen = init_params(generator_layout(3), 1);
    ModelParams disc = init_params(discriminator_layout(4), 2);
    gen.values[0] = std::numeric_limits<double>::infinity();
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch = 1;
    CHECK_THROWS_AS(train_from(gen, disc, data, cfg), NumericOverflow);
}

TEST_CASE("physics baseline is normalized and decays with distance") {
    const GridMap empty = GridMap::filled(17, 17, MapKind::Binary, 0.0);
    const GridMap base = physics_baseline(empty, {{8, 8}}, {{40.0, 25.0}});
    CHECK(base.kind() == MapKind::NormalizedPower);
    double max_v = 0.0;
    for (double v : base.values()) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        max_v = std::max(max_v, v);
    }
    CHECK(max_v == 1.0);
    // monotone decreasing along a ray from the BS
    double prev = base.at(8, 8);
    for (int x = 9; x < 17; ++x) {
        CHECK(base.at(x, 8) <= prev);
        prev = base.at(x, 8);
    }
    CHECK(base.at(8, 8) == 1.0);
}

TEST_CASE("model parameter files round-trip and reject mismatches") {
    const ModelParams gen = init_params(generator_layout(3), 77);
    const auto bytes = model_params_to_bytes(gen);
    const ModelParams back = model_params_from_bytes(bytes);
    CHECK(back.layout == gen.layout);
    CHECK(back.values == gen.values);

    auto bad = bytes;
    bad[1] = 'X';
    CHECK_THROWS_AS(model_params_from_bytes(bad), BadMagic);
    auto v9 = bytes;
    v9[4] = 9;
    CHECK_THROWS_AS(model_params_from_bytes(v9), UnsupportedVersion);
    std::vector<std::uint8_t> cut(bytes.begin(), bytes.end() - 5);
    CHECK_THROWS_AS(model_params_from_bytes(cut), Truncated);
}
