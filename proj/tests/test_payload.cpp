#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "radiosem/payload.hpp"
#include "radiosem/rng.hpp"

using namespace radiosem;

namespace {

SemanticPayload random_payload(std::mt19937_64& rng) {
    SemanticPayload p;
    p.scheme = canonical(rng) < 0.5 ? Scheme::Vq : Scheme::Jpeg;
    p.width = static_cast<std::uint16_t>(8 + bounded(rng, 512));
    p.height = static_cast<std::uint16_t>(8 + bounded(rng, 512));
    const int n_bs = 1 + static_cast<int>(bounded(rng, 5));
    for (int i = 0; i < n_bs; ++i) {
        p.bs_list.push_back({static_cast<int>(bounded(rng, p.width)),
                             static_cast<int>(bounded(rng, p.height))});
        // values that survive the f32 wire format exactly
        p.ldpl_list.push_back({static_cast<float>(uniform(rng, -100, 100)),
                               static_cast<float>(uniform(rng, -50, 50))});
    }
    const std::size_t blob_len = 1 + bounded(rng, 2000);
    p.seg_blob.resize(blob_len);
    for (auto& b : p.seg_blob) b = static_cast<std::uint8_t>(bounded(rng, 256));
    return p;
}

bool equal(const SemanticPayload& a, const SemanticPayload& b) {
    return a.scheme == b.scheme && a.width == b.width && a.height == b.height &&
           a.bs_list == b.bs_list && a.ldpl_list == b.ldpl_list &&
           a.seg_blob == b.seg_blob;
}

}  // namespace

TEST_CASE("minimal payload serializes to exactly 28 bytes") {
    SemanticPayload p;
    p.scheme = Scheme::Vq;
    p.width = 8;
    p.height = 8;
    p.bs_list = {{3, 4}};
    p.ldpl_list = {{40.0, 20.0}};
    p.seg_blob = {0xAB};
    const auto bytes = serialize(p);
    CHECK(bytes.size() == 28);  // 4+1+1+2+2+1+(2+2+4+4)+4+1
    CHECK(equal(deserialize(bytes), p));
}

TEST_CASE("serialization is deterministic") {
    std::mt19937_64 rng(127);
    const SemanticPayload p = random_payload(rng);
    CHECK(serialize(p) == serialize(p));
}

TEST_CASE("serialize validates its invariants") {
    SemanticPayload p;
    p.scheme = Scheme::Vq;
    p.width = 16;
    p.height = 16;
    p.seg_blob = {1};
    CHECK_THROWS_AS(serialize(p), LengthMismatch);  // no BS
    p.bs_list = {{1, 1}};
    p.ldpl_list = {{40, 20}};
    p.seg_blob.clear();
    CHECK_THROWS_AS(serialize(p), LengthMismatch);  // empty blob
    p.seg_blob = {1};
    p.bs_list.assign(300, {1, 1});
    p.ldpl_list.assign(300, {40, 20});
    CHECK_THROWS_AS(serialize(p), TooManyBs);
}

TEST_CASE("deserialize rejects malformed streams") {
    SemanticPayload p;
    p.scheme = Scheme::Jpeg;
    p.width = 32;
    p.height = 32;
    p.bs_list = {{5, 6}, {7, 8}};
    p.ldpl_list = {{40, 20}, {35, 25}};
    p.seg_blob = {1, 2, 3, 4, 5};
    auto bytes = serialize(p);

    auto wrong_magic = bytes;
    wrong_magic[0] = 'X';
    CHECK_THROWS_AS(deserialize(wrong_magic), BadMagic);

    auto wrong_version = bytes;
    wrong_version[4] = 7;
    CHECK_THROWS_AS(deserialize(wrong_version), UnsupportedVersion);

    // cut mid-blob and mid-header
    for (std::size_t cut : {bytes.size() - 2, std::size_t{9}, std::size_t{15}}) {
        std::vector<std::uint8_t> trunc(bytes.begin(), bytes.begin() + cut);
        CHECK_THROWS_AS(deserialize(trunc), Truncated);
    }

    auto trailing = bytes;
    trailing.push_back(0);
    CHECK_THROWS_AS(deserialize(trailing), LengthMismatch);
}

TEST_CASE("round-trip holds over fuzzed payloads") {
    std::mt19937_64 rng(131);
    for (int trial = 0; trial < 2000; ++trial) {
        const SemanticPayload p = random_payload(rng);
        const auto bytes = serialize(p);
        CHECK(equal(deserialize(bytes), p));
    }
}

TEST_CASE("channel with zero error rate is the identity") {
    std::mt19937_64 rng(137);
    std::vector<std::uint8_t> data(512);
    for (auto& b : data) b = static_cast<std::uint8_t>(bounded(rng, 256));
    ChannelConfig cfg;
    cfg.ber = 0.0;
    cfg.seed = 99;
    cfg.protect_header = false;
    CHECK(apply_channel(data, cfg) == data);
}

TEST_CASE("channel corruption is deterministic per seed") {
    std::vector<std::uint8_t> data(256, 0x5A);
    ChannelConfig cfg;
    cfg.ber = 0.05;
    cfg.seed = 1234;
    cfg.protect_header = false;
    const auto a = apply_channel(data, cfg);
    const auto b = apply_channel(data, cfg);
    CHECK(a == b);
    CHECK(a != data);
    cfg.seed = 1235;
    CHECK(apply_channel(data, cfg) != a);
}

TEST_CASE("flip statistics follow the binomial law") {
    // ber = 0.01 over 1e6 bits: expect 1e4 +- 3 sigma, sigma ~= 99.5
    std::vector<std::uint8_t> data(125000, 0x00);
    ChannelConfig cfg;
    cfg.ber = 0.01;
    cfg.protect_header = false;
    const double sigma = std::sqrt(1e6 * 0.01 * 0.99);
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        cfg.seed = seed;
        const auto noisy = apply_channel(data, cfg);
        long flips = 0;
        for (std::size_t i = 0; i < noisy.size(); ++i) {
            flips += __builtin_popcount(noisy[i]);
        }
        CHECK(std::abs(flips - 10000.0) <= 3.0 * sigma);
    }
}

TEST_CASE("protect_header keeps the header parse-identical at any ber") {
    std::mt19937_64 rng(139);
    const SemanticPayload p = random_payload(rng);
    const auto bytes = serialize(p);
    ChannelConfig cfg;
    cfg.ber = 0.4;
    cfg.seed = 7;
    cfg.protect_header = true;
    const auto noisy = apply_channel(bytes, cfg);
    CHECK(noisy.size() == bytes.size());
    const SemanticPayload q = deserialize(noisy);
    CHECK(q.scheme == p.scheme);
    CHECK(q.width == p.width);
    CHECK(q.height == p.height);
    CHECK(q.bs_list == p.bs_list);
    CHECK(q.ldpl_list == p.ldpl_list);
}

TEST_CASE("bandwidth measurement is linear in the byte count") {
    CHECK(measure_bandwidth(std::vector<std::uint8_t>(1024, 0)) == 8.192);
    CHECK(measure_bandwidth(std::vector<std::uint8_t>{}) == 0.0);
    std::mt19937_64 rng(149);
    const std::size_t a = bounded(rng, 5000), b = bounded(rng, 5000);
    CHECK(measure_bandwidth(std::vector<std::uint8_t>(a + b, 1)) ==
          doctest::Approx(measure_bandwidth(std::vector<std::uint8_t>(a, 1)) +
                          measure_bandwidth(std::vector<std::uint8_t>(b, 1))));
}

TEST_CASE("raw baseline counts segmentation bits plus 64 bits per sample") {
    const GridMap seg = GridMap::filled(256, 256, MapKind::Binary, 0.0);
    const SparseObservationSet none(256, 256, {});
    CHECK(raw_baseline_bits(seg, none) == 65536);

    std::vector<Observation> ten;
    for (int i = 0; i < 10; ++i) ten.push_back({i, 0, -50.0});
    const GridMap tiny = GridMap::filled(1, 1, MapKind::Binary, 0.0);
    const SparseObservationSet obs(256, 256, ten);
    CHECK(raw_baseline_bits(tiny, obs) == 1 + 640);
}
