#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <numeric>

#include "../support/oracles.hpp"
#include "specmap/classify/sam.hpp"
#include "specmap/common/error.hpp"

using namespace specmap;
using namespace specmap::classify;
using cube::SpectralCube;

namespace {

SpectralCube make_cube(int w, int h, std::size_t bands, std::vector<double> data, RegionMask valid) {
    std::vector<cube::BandDescriptor> desc(bands);
    for (std::size_t k = 0; k < bands; ++k) desc[k].channel = "b" + std::to_string(k);
    return SpectralCube(w, h, std::move(desc), std::move(data), std::move(valid));
}

SpectralCube random_cube(oracle::Rng& rng, int w, int h, std::size_t bands, bool with_zeros = true) {
    std::vector<double> data(static_cast<std::size_t>(w) * h * bands);
    for (double& x : data) x = rng.uniform();
    RegionMask valid(w, h, 1);
    for (auto& v : valid.data) v = rng.below(8) != 0;
    if (with_zeros)
        for (std::size_t i = 0; i < valid.size(); i += 37)
            std::fill_n(data.begin() + static_cast<std::ptrdiff_t>(i * bands), bands, 0.0);
    return make_cube(w, h, bands, std::move(data), std::move(valid));
}

std::vector<double> random_vector(oracle::Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform();
    return v;
}

double angle(std::span<const double> u, std::span<const double> v) {
    return *spectral_angle(u, v);
}

} // namespace

TEST_CASE("spectral angle anchors") {
    const std::vector<double> a{1, 2, 3, 4, 5, 6};
    CHECK(angle(a, a) == 0.0);
    const std::vector<double> e1{1, 0, 0, 0, 0, 0}, e2{0, 1, 0, 0, 0, 0}, d{1, 1, 0, 0, 0, 0};
    CHECK(std::abs(angle(e1, e2) - std::numbers::pi / 2) <= 1e-12);
    CHECK(std::abs(angle(e1, d) - std::numbers::pi / 4) <= 1e-12);
    CHECK_FALSE(spectral_angle(a, std::vector<double>(6, 0.0)));
    CHECK_FALSE(spectral_angle(std::vector<double>(6, 0.0), a));
    CHECK_THROWS_AS(spectral_angle(a, std::vector<double>{1, 2, 3}), ValidationError);
    const std::vector<double> neg{-1, -2, -3, -4, -5, -6};
    CHECK(std::abs(angle(a, neg) - std::numbers::pi) <= 1e-7);
}

TEST_CASE("spectral angle symmetry, scale invariance and range") {
    oracle::Rng rng(31);
    for (int i = 0; i < 1000; ++i) {
        const auto u = random_vector(rng, 6), v = random_vector(rng, 6);
        const double uv = angle(u, v);
        REQUIRE(std::abs(uv - angle(v, u)) <= 1e-12);
        REQUIRE(uv >= 0.0);
        REQUIRE(uv <= std::numbers::pi);
        const double c = std::pow(10.0, rng.uniform(-6.0, 6.0));
        std::vector<double> cv = v;
        for (double& x : cv) x *= c;
        REQUIRE(std::abs(angle(u, cv) - uv) <= 1e-9);
    }
}

TEST_CASE("sam_map of a cube equal to the reference is zero on valid texels") {
    oracle::Rng rng(32);
    const auto ref = random_vector(rng, 6);
    std::vector<double> data;
    for (int i = 0; i < 20 * 10; ++i) data.insert(data.end(), ref.begin(), ref.end());
    RegionMask valid(20, 10, 1);
    valid[{3, 3}] = 0;
    const auto map = sam_map(make_cube(20, 10, 6, data, valid), {"r", ref});
    for (std::size_t i = 0; i < map.size(); ++i) CHECK(map.data[i] == (valid.data[i] ? 0.0 : kUndefinedAngle));
}

TEST_CASE("sam_map is invariant to per-texel scaling") {
    oracle::Rng rng(33);
    const auto ref = random_vector(rng, 6);
    std::vector<double> data;
    for (int i = 0; i < 16 * 16; ++i) {
        const double c = std::pow(10.0, rng.uniform(-3.0, 3.0));
        for (double x : ref) data.push_back(c * x);
    }
    const auto map = sam_map(make_cube(16, 16, 6, data, RegionMask(16, 16, 1)), {"r", ref});
    // acos near 1 resolves only ~1.5e-8 per ulp of the cosine.
    for (double a : map.data) CHECK(a <= 3e-8);
}

TEST_CASE("sam_map equals the scalar oracle bit for bit") {
    oracle::Rng rng(34);
    for (int trial = 0; trial < 10; ++trial) {
        const int w = trial == 0 ? 16 : 1 + static_cast<int>(rng.below(64));
        const int h = trial == 0 ? 16 : 1 + static_cast<int>(rng.below(64));
        const SpectralCube cube = random_cube(rng, w, h, 6);
        const auto ref = random_vector(rng, 6);
        const auto map = sam_map(cube, {"r", ref}, 1 + static_cast<unsigned>(trial % 4));
        for (int row = 0; row < h; ++row) {
            for (int col = 0; col < w; ++col) {
                const auto s = cube.spectrum_at({col, row});
                const double expected = s ? oracle::angle(s->data(), ref.data(), 6) : -1.0;
                REQUIRE(map[{col, row}] == expected);
            }
        }
    }
}

TEST_CASE("sam_map rejects bad references") {
    oracle::Rng rng(35);
    const SpectralCube cube = random_cube(rng, 4, 4, 6);
    CHECK_THROWS_AS(sam_map(cube, {"short", {1, 2, 3}}), ValidationError);
    CHECK_THROWS_AS(sam_map(cube, {"zero", std::vector<double>(6, 0.0)}), ValidationError);
}

TEST_CASE("threshold_region boundaries") {
    SamMap map(4, 1);
    map.data = {0.0, 0.1, kUndefinedAngle, std::numbers::pi};
    CHECK(threshold_region(map, 0.0).data == std::vector<std::uint8_t>{1, 0, 0, 0});
    CHECK(threshold_region(map, std::numbers::pi).data == std::vector<std::uint8_t>{1, 1, 0, 1});
    CHECK(threshold_region(map, 0.1).data == std::vector<std::uint8_t>{1, 1, 0, 0});
    CHECK_THROWS_AS(threshold_region(map, -0.1), ValidationError);
}

TEST_CASE("two materials at known angles separate at 0.15 rad") {
    // Material A along the reference, material B rotated 0.5 rad away in the
    // plane spanned by the reference and an orthogonal direction.
    oracle::Rng rng(36);
    std::vector<double> a = random_vector(rng, 6);
    std::vector<double> w = random_vector(rng, 6);
    const double na = std::sqrt(std::inner_product(a.begin(), a.end(), a.begin(), 0.0));
    for (double& x : a) x /= na;
    const double proj = std::inner_product(w.begin(), w.end(), a.begin(), 0.0);
    for (std::size_t k = 0; k < 6; ++k) w[k] -= proj * a[k];
    const double nw = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
    for (double& x : w) x /= nw;
    std::vector<double> b(6);
    for (std::size_t k = 0; k < 6; ++k) b[k] = std::cos(0.5) * a[k] + std::sin(0.5) * w[k];

    const int W = 32, H = 24;
    std::vector<double> data;
    RegionMask truth(W, H, 0);
    for (int row = 0; row < H; ++row) {
        for (int col = 0; col < W; ++col) {
            const bool is_a = (col / 4 + row / 3) % 2 == 0;
            truth[{col, row}] = is_a;
            const double scale = rng.uniform(0.2, 3.0);
            for (double x : is_a ? a : b) data.push_back(scale * x);
        }
    }
    const auto map = sam_map(make_cube(W, H, 6, data, RegionMask(W, H, 1)), {"A", a});
    for (std::size_t i = 0; i < map.size(); ++i)
        if (!truth.data[i]) CHECK(std::abs(map.data[i] - 0.5) < 1e-9);
    CHECK(threshold_region(map, kDefaultThetaMax) == truth);
}

TEST_CASE("classify_multi with one reference equals thresholding") {
    oracle::Rng rng(37);
    const SpectralCube cube = random_cube(rng, 30, 20, 6);
    const ReferenceSpectrum ref{"r", random_vector(rng, 6)};
    const auto labels = classify_multi(cube, {ref}, 0.3);
    const auto region = threshold_region(sam_map(cube, ref), 0.3);
    for (std::size_t i = 0; i < labels.size(); ++i) CHECK((labels.data[i] == 0) == (region.data[i] == 1));
}

TEST_CASE("classify_multi tie goes to the lower index") {
    const std::vector<double> data{1, 1, 0, 0, 0, 0};
    const auto labels = classify_multi(make_cube(1, 1, 6, data, RegionMask(1, 1, 1)),
                                       {{"x", {1, 0, 0, 0, 0, 0}}, {"y", {0, 1, 0, 0, 0, 0}}}, 1.0);
    CHECK(labels.data[0] == 0);
}

TEST_CASE("classify_multi equals the exhaustive argmin") {
    oracle::Rng rng(38);
    for (int trial = 0; trial < 10; ++trial) {
        const SpectralCube cube = random_cube(rng, 64, 64, 6);
        std::vector<ReferenceSpectrum> refs;
        for (int j = 0; j < 3; ++j) refs.push_back({"r" + std::to_string(j), random_vector(rng, 6)});
        const double theta = rng.uniform(0.05, 0.6);
        const auto labels = classify_multi(cube, refs, theta, 1 + static_cast<unsigned>(trial % 3));
        for (int row = 0; row < 64; ++row) {
            for (int col = 0; col < 64; ++col) {
                const auto s = cube.spectrum_at({col, row});
                std::int32_t expected = -1;
                if (s) {
                    double best = 10.0;
                    for (int j = 0; j < 3; ++j) {
                        const double a = oracle::angle(s->data(), refs[static_cast<std::size_t>(j)].values.data(), 6);
                        if (a >= 0.0 && a < best) {
                            best = a;
                            expected = j;
                        }
                    }
                    if (expected >= 0 && best > theta) expected = -1;
                }
                REQUIRE(labels[{col, row}] == expected);
            }
        }
    }
}

TEST_CASE("classify_multi is stable under reference permutation") {
    oracle::Rng rng(39);
    const SpectralCube cube = random_cube(rng, 40, 40, 6);
    const std::vector<ReferenceSpectrum> refs = {{"a", random_vector(rng, 6)}, {"b", random_vector(rng, 6)},
                                                 {"c", random_vector(rng, 6)}};
    const std::vector<ReferenceSpectrum> perm = {refs[2], refs[0], refs[1]};
    const std::int32_t rename[3] = {2, 0, 1};  // index in perm -> index in refs
    const auto l1 = classify_multi(cube, refs, 0.4);
    const auto l2 = classify_multi(cube, perm, 0.4);
    for (std::size_t i = 0; i < l1.size(); ++i) CHECK(l1.data[i] == (l2.data[i] < 0 ? -1 : rename[l2.data[i]]));
}

TEST_CASE("threshold regions grow with the threshold") {
    oracle::Rng rng(40);
    const SpectralCube cube = random_cube(rng, 64, 64, 6);
    const auto map = sam_map(cube, {"r", random_vector(rng, 6)});
    RegionMask previous = threshold_region(map, 0.0);
    for (double theta = 0.01; theta <= 1.6; theta += 0.01) {
        const RegionMask next = threshold_region(map, theta);
        for (std::size_t i = 0; i < next.size(); ++i) {
            REQUIRE(next.data[i] >= previous.data[i]);
            if (next.data[i]) REQUIRE(map.data[i] != kUndefinedAngle);
        }
        previous = next;
    }
}

TEST_CASE("reference from a texel and its neighbourhood") {
    std::vector<double> data;
    for (int i = 0; i < 9; ++i) data.insert(data.end(), {static_cast<double>(i), 1.0});
    RegionMask valid(3, 3, 1);
    valid[{2, 2}] = 0;
    const SpectralCube cube = make_cube(3, 3, 2, data, valid);
    CHECK(reference_from_texel(cube, {1, 1}, 0).values == std::vector<double>{4.0, 1.0});
    // Mean over the 8 valid texels of the full window: (0+...+7)/8.
    CHECK(reference_from_texel(cube, {1, 1}, 1).values == std::vector<double>{3.5, 1.0});
    CHECK(reference_from_texel(cube, {0, 0}, 1).values == std::vector<double>{2.0, 1.0});
    CHECK_THROWS_WITH_AS(reference_from_texel(cube, {2, 2}, 0), doctest::Contains("reference texel not on surface"),
                         MaskedTexelError);
    CHECK_THROWS_AS(reference_from_texel(cube, {1, 1}, -1), ValidationError);
}

TEST_CASE("region statistics") {
    SamMap map(5, 1);
    map.data = {0.3, 0.1, kUndefinedAngle, 0.2, 0.05};
    RegionMask region(5, 1, 1);
    region.data[4] = 0;
    const auto stats = region_stats(map, region);
    CHECK(stats.count == 3);
    CHECK(*stats.min_angle == 0.1);
    CHECK(*stats.median_angle == 0.2);
    CHECK_FALSE(region_stats(map, RegionMask(5, 1, 0)).min_angle);
}

TEST_CASE("connected component filter") {
    RegionMask r(5, 1, 0);
    r.data = {1, 1, 0, 1, 1};
    CHECK(keep_connected(r, {0, 0}).data == std::vector<std::uint8_t>{1, 1, 0, 0, 0});
    CHECK(keep_connected(r, {2, 0}).data == std::vector<std::uint8_t>{0, 0, 0, 0, 0});
}

TEST_CASE("overlay examples") {
    const auto empty = make_overlay(RegionMask(3, 2, 0));
    CHECK(std::all_of(empty.data.begin(), empty.data.end(), [](Rgba p) { return p.a == 0; }));
    const auto full = make_overlay(RegionMask(3, 2, 1), kMagenta);
    CHECK(std::all_of(full.data.begin(), full.data.end(), [](Rgba p) { return p == kMagenta; }));
    RegionMask one(3, 2, 0);
    one[{1, 1}] = 1;
    const auto single = make_overlay(one);
    CHECK(std::count_if(single.data.begin(), single.data.end(), [](Rgba p) { return p.a == 255; }) == 1);
    CHECK(single[{1, 1}] == kMagenta);
    CHECK(overlay_bytes(single).size() == 24);
}

TEST_CASE("parallel results do not depend on worker count") {
    oracle::Rng rng(41);
    const SpectralCube cube = random_cube(rng, 97, 61, 6);
    const ReferenceSpectrum ref{"r", random_vector(rng, 6)};
    const auto base = sam_map(cube, ref, 1);
    for (unsigned w : {2u, 5u, 16u}) CHECK(sam_map(cube, ref, w) == base);
}
