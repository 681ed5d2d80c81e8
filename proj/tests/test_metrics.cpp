#include "smk/error.hpp"
#include "smk/metrics.hpp"

#include <doctest.h>

#include <random>

using namespace smk;

namespace {

BinaryMask mask_with(int w, int h, std::initializer_list<int> on) {
    BinaryMask m(w, h);
    for (int i : on) m.set(i / w, i % w, true);
    return m;
}

}  // namespace

TEST_CASE("confusion counts") {
    const std::vector<LabeledPrediction> s = {{1, 0.9}, {0, 0.4}, {1, 0.2}};
    CHECK(confusion(s) == ConfusionCounts{1, 0, 1, 1});

    const std::vector<LabeledPrediction> good = {{1, 0.99}, {0, 0.01}, {1, 0.8}, {0, 0.3}};
    const auto c = confusion(good);
    CHECK(c.fp == 0);
    CHECK(c.fn == 0);

    const std::vector<LabeledPrediction> tie = {{0, 0.5}};
    CHECK(confusion(tie).fp == 1);
    CHECK(confusion(tie, 0.6).tn == 1);

    CHECK_THROWS_AS(confusion(std::span<const LabeledPrediction>{}), Error);
    CHECK_THROWS_AS(confusion(tie, 1.0), Error);
    CHECK_THROWS_AS(confusion(tie, 0.0), Error);
}

TEST_CASE("classification metrics") {
    const auto perfect = classification_metrics({1, 0, 1, 0});
    CHECK(*perfect.acc == 1.0);
    CHECK(*perfect.spec == 1.0);
    CHECK(*perfect.sens == 1.0);
    CHECK(*perfect.f1 == 1.0);

    const auto m = classification_metrics({3, 1, 2, 2});
    CHECK(*m.acc == 0.625);
    CHECK(*m.spec == doctest::Approx(2.0 / 3).epsilon(1e-15));
    CHECK(*m.sens == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(*m.f1 == doctest::Approx(0.66667).epsilon(1e-5));

    const auto none = classification_metrics({0, 0, 4, 2});
    CHECK_FALSE(none.f1.has_value());
    CHECK(*none.sens == 0.0);
    const auto no_pos = classification_metrics({0, 1, 3, 0});
    CHECK_FALSE(no_pos.sens.has_value());
    CHECK_FALSE(no_pos.f1.has_value());
}

TEST_CASE("accuracy times total is tp + tn") {
    std::mt19937 rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<LabeledPrediction> s(1 + rng() % 50);
        for (auto& x : s) x = {int(rng() % 2), (rng() % 1000) / 1000.0};
        const auto c = confusion(s);
        CHECK(c.total() == static_cast<std::int64_t>(s.size()));
        const auto m = classification_metrics(c);
        CHECK(std::llround(*m.acc * double(c.total())) == c.tp + c.tn);
        for (const auto& v : {m.acc, m.spec, m.sens, m.f1}) {
            if (v) {
                CHECK(*v >= 0.0);
                CHECK(*v <= 1.0);
            }
        }
    }
}

TEST_CASE("iou_dice fixtures") {
    const auto a = mask_with(4, 4, {0, 5, 6});
    const auto o = iou_dice(a, a);
    CHECK(o.iou == 1.0);
    CHECK(o.dice == 1.0);
    const auto d = iou_dice(mask_with(4, 4, {0, 1}), mask_with(4, 4, {2, 3}));
    CHECK(d.iou == 0.0);
    CHECK(d.dice == 0.0);
    const auto h = iou_dice(mask_with(4, 4, {0, 1}), mask_with(4, 4, {1, 2}));
    CHECK(h.iou == doctest::Approx(1.0 / 3).epsilon(1e-15));
    CHECK(h.dice == 0.5);
    const auto e = iou_dice(BinaryMask(3, 3), BinaryMask(3, 3));
    CHECK(e.iou == 1.0);
    CHECK(e.dice == 1.0);
    CHECK_THROWS_AS(iou_dice(BinaryMask(3, 3), BinaryMask(3, 4)), Error);
}

TEST_CASE("Dice and IoU are linked and symmetric") {
    std::mt19937 rng(10);
    for (int trial = 0; trial < 100; ++trial) {
        BinaryMask s(16, 16), t(16, 16);
        for (int i = 0; i < 256; ++i) {
            s.set(i / 16, i % 16, rng() % 3 == 0);
            t.set(i / 16, i % 16, rng() % 2 == 0);
        }
        const auto st = iou_dice(s, t);
        const auto ts = iou_dice(t, s);
        CHECK(std::abs(st.dice - 2 * st.iou / (1 + st.iou)) <= 1e-12);
        CHECK(st.iou == ts.iou);
        CHECK(st.dice == ts.dice);
    }
}
