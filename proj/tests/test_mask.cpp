#include "smk/error.hpp"
#include "smk/mask.hpp"
#include "support/shapes.hpp"

#include <doctest.h>

#include <random>
#include <set>
#include <string>

using namespace smk;

namespace {

std::vector<std::uint8_t> pgm_p5(int w, int h, std::uint8_t fill) {
    const std::string header = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), static_cast<std::size_t>(w) * h, fill);
    return out;
}

std::vector<std::uint8_t> bytes(const std::string& s) { return {s.begin(), s.end()}; }

BinaryMask from_rows(const std::vector<std::string>& rows) {
    BinaryMask m(static_cast<int>(rows[0].size()), static_cast<int>(rows.size()));
    for (int r = 0; r < m.height(); ++r)
        for (int c = 0; c < m.width(); ++c) m.set(r, c, rows[r][c] == '#');
    return m;
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

}  // namespace

TEST_CASE("load_mask reads P5 foreground and background") {
    const auto all_fg = load_mask(pgm_p5(4, 4, 255));
    CHECK(all_fg.width() == 4);
    CHECK(all_fg.height() == 4);
    CHECK(all_fg.count() == 16);
    CHECK(load_mask(pgm_p5(4, 4, 0)).count() == 0);
}

TEST_CASE("load_mask reads ASCII P2 with comments and thresholds at > 0") {
    const auto m = load_mask(bytes("P2\n# a comment\n3 2\n# another\n15\n0 1 0\n15 0 7\n"), 2.0, 0.5);
    CHECK(m.count() == 3);
    CHECK(m.at(0, 1));
    CHECK(m.at(1, 0));
    CHECK(m.at(1, 2));
    CHECK(m.scale_x() == 2.0);
    CHECK(m.scale_y() == 0.5);
}

TEST_CASE("load_mask rejects malformed input") {
    CHECK(code_of([] { load_mask(bytes("P6\n1 1\n255\n\x01")); }) == ErrorCode::MalformedFile);
    CHECK(code_of([] { load_mask(bytes("P5\n4 4\n255\n\x01\x02")); }) == ErrorCode::MalformedFile);
    CHECK(code_of([] { load_mask(bytes("P5\n4 4\n65535\n")); }) == ErrorCode::MalformedFile);
    CHECK(code_of([] { load_mask(bytes("P2\n2 1\n255\n0")); }) == ErrorCode::MalformedFile);
    CHECK(code_of([] { load_mask(bytes("")); }) == ErrorCode::MalformedFile);
    CHECK(code_of([] { load_mask(pgm_p5(2, 2, 0), 0.0, 1.0); }) == ErrorCode::InvalidScale);
    CHECK(code_of([] { load_mask(pgm_p5(2, 2, 0), 1.0, -1.0); }) == ErrorCode::InvalidScale);
}

TEST_CASE("write_mask round-trips {0,255} P5 content byte for byte") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const int w = 1 + static_cast<int>(rng() % 17);
        const int h = 1 + static_cast<int>(rng() % 13);
        auto file = pgm_p5(w, h, 0);
        const std::size_t header = file.size() - static_cast<std::size_t>(w) * h;
        for (std::size_t i = header; i < file.size(); ++i) file[i] = (rng() % 3 == 0) ? 255 : 0;
        const auto m = load_mask(file);
        CHECK(write_mask(m) == file);
        CHECK(load_mask(write_mask(m)) == m);
    }
}

TEST_CASE("largest_component keeps the biggest 8-connected blob") {
    BinaryMask m(20, 20);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m.set(r, c, true);  // 9 px
    for (int c = 10; c < 15; ++c) m.set(10, c, true);   // 5 px
    const auto out = largest_component(m);
    CHECK(out.count() == 9);
    CHECK(out.at(0, 0));
    CHECK_FALSE(out.at(10, 10));

    BinaryMask single(5, 5);
    single.set(2, 3, true);
    CHECK(largest_component(single) == single);

    CHECK(code_of([] { largest_component(BinaryMask(3, 3)); }) == ErrorCode::EmptyMask);
}

TEST_CASE("largest_component breaks ties by row-major first pixel") {
    BinaryMask m(20, 20);
    for (int r = 10; r < 12; ++r)
        for (int c = 10; c < 12; ++c) m.set(r, c, true);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) m.set(r, c, true);
    const auto out = largest_component(m);
    CHECK(out.count() == 4);
    CHECK(out.at(0, 0));
}

TEST_CASE("largest_component treats diagonal neighbors as connected and is idempotent") {
    const auto m = from_rows({"#...", ".#..", "..#.", "...#", "##.."});
    const auto once = largest_component(m);
    CHECK(once.count() == 4);
    CHECK(largest_component(once) == once);

    std::mt19937 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        BinaryMask r(24, 24);
        for (int i = 0; i < 24 * 24; ++i)
            if (rng() % 4 == 0) r.set(i / 24, i % 24, true);
        if (r.empty()) continue;
        const auto a = largest_component(r);
        CHECK(largest_component(a) == a);
    }
}

TEST_CASE("trace_contour degenerate shapes") {
    BinaryMask one(5, 5);
    one.set(2, 3, true);
    const auto p1 = trace_contour(one);
    REQUIRE(p1.size() == 1);
    CHECK(p1.vertices[0] == PlanarPoint{3, 2});

    BinaryMask bar(4, 3);
    bar.set(1, 1, true);
    bar.set(1, 2, true);
    const auto p2 = trace_contour(bar);
    REQUIRE(p2.size() == 2);
    CHECK(p2.vertices[0] == PlanarPoint{1, 1});
    CHECK(p2.vertices[1] == PlanarPoint{2, 1});

    CHECK(code_of([] { trace_contour(BinaryMask(2, 2)); }) == ErrorCode::EmptyMask);
}

TEST_CASE("trace_contour of a filled 3x3 square visits the 8 perimeter centers in order") {
    // Hand trace: start (0,0) with west backtrack, scanning clockwise on screen.
    const auto m = shapes::rect(3, 3, 0, 2, 0, 2);
    const auto p = trace_contour(m);
    const std::vector<PlanarPoint> expected = {{0, 0}, {1, 0}, {2, 0}, {2, 1},
                                               {2, 2}, {1, 2}, {0, 2}, {0, 1}};
    CHECK(p.vertices == expected);
    CHECK(signed_area2(p.vertices) > 0.0);
}

TEST_CASE("trace_contour visits every boundary pixel of simply connected shapes") {
    std::mt19937 rng(3);
    int checked = 0;
    for (int trial = 0; trial < 200 && checked < 60; ++trial) {
        // Random 4-connected, hole-free shape: a random walk of thick steps.
        BinaryMask m(30, 30);
        int r = 15, c = 15;
        for (int s = 0; s < 60; ++s) {
            m.set(r, c, true);
            m.set(r, c + 1, true);
            m.set(r + 1, c, true);
            switch (rng() % 4) {
                case 0: r = std::clamp(r + 1, 1, 27); break;
                case 1: r = std::clamp(r - 1, 1, 27); break;
                case 2: c = std::clamp(c + 1, 1, 27); break;
                default: c = std::clamp(c - 1, 1, 27); break;
            }
        }
        // Reject shapes with holes: background must be 4-connected to the border.
        BinaryMask outside(30, 30);
        std::vector<std::pair<int, int>> stack;
        for (int i = 0; i < 30; ++i)
            for (auto [rr, cc] : {std::pair{0, i}, {29, i}, {i, 0}, {i, 29}})
                if (!m.at(rr, cc) && !outside.at(rr, cc)) {
                    outside.set(rr, cc, true);
                    stack.push_back({rr, cc});
                }
        while (!stack.empty()) {
            auto [rr, cc] = stack.back();
            stack.pop_back();
            for (auto [dr, dc] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
                const int nr = rr + dr, nc = cc + dc;
                if (m.in_bounds(nr, nc) && !m.at(nr, nc) && !outside.at(nr, nc)) {
                    outside.set(nr, nc, true);
                    stack.push_back({nr, nc});
                }
            }
        }
        if (outside.count() + m.count() != 900) continue;
        ++checked;

        const auto contour = trace_contour(m);
        std::set<std::pair<int, int>> traced;
        for (const auto& v : contour.vertices) traced.insert({int(v.y), int(v.x)});

        for (int rr = 0; rr < 30; ++rr) {
            for (int cc = 0; cc < 30; ++cc) {
                if (!m.at(rr, cc)) continue;
                const bool boundary = !m.sample(rr + 1, cc) || !m.sample(rr - 1, cc) ||
                                      !m.sample(rr, cc + 1) || !m.sample(rr, cc - 1);
                if (boundary) CHECK(traced.count({rr, cc}) == 1);
                if (traced.count({rr, cc})) CHECK(boundary);
            }
        }
    }
    CHECK(checked >= 20);
}

TEST_CASE("centroid") {
    CHECK(centroid(shapes::rect(30, 30, 0, 9, 0, 19)) == PlanarPoint{9.5, 4.5});
    BinaryMask one(10, 10);
    one.set(7, 3, true);
    CHECK(centroid(one) == PlanarPoint{3, 7});
    BinaryMask two(5, 5);
    two.set(0, 0, true);
    two.set(0, 2, true);
    CHECK(centroid(two) == PlanarPoint{1, 0});
    CHECK(code_of([] { centroid(BinaryMask(2, 2)); }) == ErrorCode::EmptyMask);
}

TEST_CASE("centroid follows integer translation") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        BinaryMask a(40, 40), b(40, 40);
        const int dr = int(rng() % 10), dc = int(rng() % 10);
        for (int i = 0; i < 60; ++i) {
            const int r = int(rng() % 30), c = int(rng() % 30);
            a.set(r, c, true);
            b.set(r + dr, c + dc, true);
        }
        const auto ca = centroid(a), cb = centroid(b);
        CHECK(cb.x == doctest::Approx(ca.x + dc).epsilon(1e-12));
        CHECK(cb.y == doctest::Approx(ca.y + dr).epsilon(1e-12));
    }
}

TEST_CASE("scaled_extent") {
    const auto e = scaled_extent(shapes::rect(64, 64, 10, 49, 20, 39));
    CHECK(e.h == 40.0);
    CHECK(e.w == 20.0);
    const auto s = scaled_extent(shapes::rect(64, 64, 10, 49, 20, 39, 1.0, 2.0));
    CHECK(s.h == 80.0);
    CHECK(s.w == 20.0);
    BinaryMask one(3, 3);
    one.set(1, 1, true);
    CHECK(scaled_extent(one).h == 1.0);
    CHECK(scaled_extent(one).w == 1.0);
    CHECK(code_of([] { scaled_extent(BinaryMask(2, 2)); }) == ErrorCode::EmptyMask);
}

TEST_CASE("BinaryMask construction invariants") {
    CHECK(code_of([] { BinaryMask(0, 3); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { BinaryMask(2, 2, std::vector<std::uint8_t>(3)); }) == ErrorCode::DimensionMismatch);
    CHECK(code_of([] { BinaryMask(2, 2, 0.0, 1.0); }) == ErrorCode::InvalidScale);
}
