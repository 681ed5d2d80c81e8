#include "smk/error.hpp"
#include "smk/ingest.hpp"
#include "smk/shape_margin.hpp"
#include "support/oracles.hpp"
#include "support/shapes.hpp"

#include <doctest.h>

#include <numbers>
#include <random>

using namespace smk;

namespace {

RadialProfile profile_of(std::vector<double> r, std::vector<double> big_r = {}) {
    RadialProfile p;
    p.n = static_cast<int>(r.size());
    p.contour_dist = std::move(r);
    p.hull_dist = big_r.empty() ? p.contour_dist : std::move(big_r);
    for (int i = 0; i < p.n; ++i) p.angles.push_back(2 * std::numbers::pi * i / p.n);
    return p;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected smk::Error");
    return ErrorCode::InvalidArgument;
}

BinaryMask transpose(const BinaryMask& m) {
    BinaryMask t(m.height(), m.width(), m.scale_y(), m.scale_x());
    for (int r = 0; r < m.height(); ++r)
        for (int c = 0; c < m.width(); ++c) t.set(c, r, m.at(r, c));
    return t;
}

}  // namespace

TEST_CASE("aspect_ratio from the scaled bounding box") {
    CHECK(aspect_ratio(shapes::rect(64, 64, 0, 39, 0, 19)) == 2.0);
    CHECK(aspect_ratio(shapes::rect(64, 64, 5, 34, 5, 34)) == 1.0);
    CHECK(aspect_ratio(shapes::rect(64, 64, 0, 39, 0, 19, 1.0, 0.5)) == 1.0);
    CHECK_THROWS_AS(aspect_ratio(BinaryMask(4, 4)), Error);
}

TEST_CASE("aspect_ratio is unchanged by transposing with swapped scales") {
    std::mt19937 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const int r0 = int(rng() % 20), c0 = int(rng() % 20);
        const auto m = shapes::rect(48, 40, r0, r0 + int(rng() % 20), c0, c0 + int(rng() % 15),
                                    0.5 + (rng() % 10) / 4.0, 0.5 + (rng() % 10) / 4.0);
        const auto t = transpose(m);
        CHECK(aspect_ratio(t) == doctest::Approx(1.0 / aspect_ratio(m)).epsilon(1e-14));
    }
}

TEST_CASE("bcsi fixtures") {
    CHECK(bcsi(profile_of({5, 5, 5, 5})) == 0.0);
    CHECK(bcsi(profile_of({1, 1, 1, 3})) == 0.5);
    CHECK(code_of([] { bcsi(profile_of({0, 0, 0})); }) == ErrorCode::ZeroRadii);
}

TEST_CASE("bcsi is invariant to uniform scaling of the radii") {
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> radius(0.5, 50.0), factor(0.01, 100.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> r(3 + rng() % 40);
        for (auto& v : r) v = radius(rng);
        const double k = factor(rng);
        std::vector<double> scaled = r;
        for (auto& v : scaled) v *= k;
        CHECK(bcsi(profile_of(scaled)) == doctest::Approx(bcsi(profile_of(r))).epsilon(1e-12));
    }
}

TEST_CASE("irregularity fixtures and errors") {
    CHECK(irregularity(profile_of({3, 4, 5})) == 0.0);
    CHECK(irregularity(profile_of({1, 1}, {2, 2})) == doctest::Approx(std::tanh(1.0)).epsilon(1e-15));
    CHECK(irregularity(profile_of({1, 1}, {2, 2})) == doctest::Approx(0.76159).epsilon(1e-5));
    CHECK(code_of([] { irregularity(profile_of({0, 1}, {0, 2})); }) == ErrorCode::DegenerateHull);
    CHECK(code_of([] { irregularity(profile_of({3, 1}, {2, 2})); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("irregularity stays in [0, 1) even when saturated") {
    std::vector<double> r(36, 0.0), big_r(36, 1.0);
    const double ir = irregularity(profile_of(r, big_r));
    CHECK(ir < 1.0);
    CHECK(ir > 0.999999);
}

TEST_CASE("irregularity grows as any notch deepens") {
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 3 + int(rng() % 10);
        std::vector<double> r(n), big_r(n);
        for (int i = 0; i < n; ++i) {
            big_r[i] = 1.0 + 20.0 * unit(rng);
            r[i] = big_r[i] * (0.9 + 0.1 * unit(rng));
        }
        const double before = irregularity(profile_of(r, big_r));
        const int i = int(rng() % n);
        r[i] *= unit(rng);
        CHECK(irregularity(profile_of(r, big_r)) >= before);
    }
    // Strict while away from saturation.
    CHECK(irregularity(profile_of({1, 1, 0.9}, {1, 1, 1})) < irregularity(profile_of({1, 1, 0.8}, {1, 1, 1})));
}

TEST_CASE("assess a disk") {
    const auto report = assess(shapes::disk(200, 100, 100, 40), 36);
    CHECK(report.n == 36);
    CHECK(report.ar == doctest::Approx(1.0).epsilon(0.05));
    CHECK(report.ir <= 0.02);
    CHECK(report.bcsi <= 0.02);
    CHECK(report.h == 81.0);
    CHECK(report.w == 81.0);
}

TEST_CASE("assess a wide rectangle") {
    const auto report = assess(shapes::rect(200, 200, 90, 109, 60, 139), 36);
    CHECK(report.ar == 0.25);
    CHECK(report.ir <= 0.02);
    CHECK(report.ar == report.h / report.w);
}

TEST_CASE("assess propagates errors") {
    auto code = [](auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::InvalidArgument;
    };
    CHECK(code([] { assess(BinaryMask(16, 16)); }) == ErrorCode::EmptyMask);
    CHECK(code([] { assess(shapes::rect(16, 16, 4, 4, 2, 12)); }) == ErrorCode::DegenerateHull);
}

TEST_CASE("assess keeps only the largest component") {
    auto m = shapes::disk(200, 80, 80, 30);
    for (int r = 180; r < 190; ++r)
        for (int c = 180; c < 195; ++c) m.set(r, c, true);
    const auto report = assess(m);
    CHECK(report.n == kDefaultRadials);
    CHECK(report.h == 61.0);
    CHECK(report.ir <= 0.02);
}

TEST_CASE("five-pointed star is strongly irregular and agrees with the oracle") {
    const auto star = rasterize_polygon(shapes::star(256, 256, 100, 40), 512, 512);
    const auto report = assess(star, 36);
    const double expected = oracle::irregularity(star, 36);
    CHECK(std::abs(report.ir - expected) <= 1e-2);
    CHECK(report.ir > 0.9);
    CHECK(report.ir < 1.0);
}

TEST_CASE("rasterized convex shapes have near-zero irregularity") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> pos(180, 330), axis(20, 120), angle(0, std::numbers::pi);
    for (int trial = 0; trial < 6; ++trial) {
        const auto e = shapes::ellipse(512, pos(rng), pos(rng), axis(rng), axis(rng), angle(rng));
        CHECK(assess(e).ir <= 0.02);
        const auto rr = rasterize_polygon(shapes::rotated_rect(pos(rng), pos(rng), axis(rng), axis(rng), angle(rng)),
                                          512, 512);
        CHECK(assess(rr).ir <= 0.02);
    }
}

TEST_CASE("convex shapes stay regular after resizing to the canonical grid") {
    std::mt19937 rng(23);
    std::uniform_int_distribution<int> side(200, 1000);
    std::uniform_real_distribution<double> frac(0.1, 0.3), angle(0, std::numbers::pi);
    for (int trial = 0; trial < 40; ++trial) {
        const int w = side(rng);
        const int h = side(rng);
        // A 48-gon with equal radii is a circle; resizing turns it into an ellipse.
        const double radius = std::min(w, h) * frac(rng);
        const Polygon shape = trial % 2
            ? shapes::rotated_rect(w * 0.5, h * 0.5, w * frac(rng), h * frac(rng), angle(rng))
            : shapes::star(w * 0.5, h * 0.5, radius, radius, 24);
        CHECK(assess(resize_to_canonical(rasterize_polygon(shape, w, h))).ir <= 0.02);
    }
}

TEST_CASE("star notches survive resizing") {
    const auto star = resize_to_canonical(rasterize_polygon(shapes::star(300, 200, 180, 70), 600, 400));
    CHECK(assess(star, 36).ir > 0.9);
}
