#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ctxval/detection.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace ctxval;
using testutil::image;

TEST_CASE("box_iou of half-overlapping squares is 50/150") {
    CHECK(box_iou({0, 0, 10, 10}, {5, 0, 15, 10}) == doctest::Approx(50.0 / 150.0));
    CHECK(box_iou({0, 0, 10, 10}, {0, 0, 10, 10}) == 1.0);
    CHECK(box_iou({0, 0, 10, 10}, {10, 0, 20, 10}) == 0.0);
    CHECK(box_iou({0, 0, 10, 10}, {50, 50, 60, 60}) == 0.0);
}

TEST_CASE("box_iou agrees with the pixel raster on integer boxes") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> pos(0, 40);
    std::uniform_int_distribution<int> len(1, 30);
    for (int t = 0; t < 500; ++t) {
        const double ax = pos(rng), ay = pos(rng), bx = pos(rng), by = pos(rng);
        const BoundingBox a{ax, ay, ax + len(rng), ay + len(rng)};
        const BoundingBox b{bx, by, bx + len(rng), by + len(rng)};
        CHECK(box_iou(a, b) == doctest::Approx(oracle::raster_iou(a, b)).epsilon(1e-12));
        CHECK(box_iou(a, b) == box_iou(b, a));
    }
}

TEST_CASE("objects without a prediction score zero") {
    const Dataset d = testutil::dataset("d", {image("a", 100, 100, {{0, 0, 0, 10, 10}, {0, 50, 50, 60, 60}},
                                                   {{0, 0, 0, 10, 10, 0.9}})});
    const PerformanceTable perf = object_performance(d);
    REQUIRE(perf.size() == 2);
    CHECK(perf.at({0, 0}) == 1.0);
    CHECK(perf.at({0, 1}) == 0.0);
}

TEST_CASE("a prediction is never matched to another class") {
    const Dataset d = testutil::dataset("d", {image("a", 100, 100, {{0, 0, 0, 10, 10}}, {{1, 0, 0, 10, 10, 0.9}})});
    const auto m = match_predictions(d.images[0]);
    CHECK_FALSE(m.prediction_of[0].has_value());
    CHECK(m.iou[0] == 0.0);
    CHECK(m.unmatched_prediction_indices == std::vector<std::size_t>{0});
}

TEST_CASE("higher-confidence predictions claim objects first") {
    // Both predictions prefer object 0; the confident one wins, the other falls back to object 1.
    const ImageRecord img = image("a", 100, 100, {{0, 0, 0, 10, 10}, {0, 6, 0, 16, 10}},
                                  {{0, 1, 0, 11, 10, 0.4}, {0, 2, 0, 12, 10, 0.9}});
    const auto m = match_predictions(img);
    REQUIRE(m.prediction_of[0].has_value());
    REQUIRE(m.prediction_of[1].has_value());
    CHECK(*m.prediction_of[0] == 1);
    CHECK(*m.prediction_of[1] == 0);
    CHECK(m.iou[0] == doctest::Approx(box_iou({0, 0, 10, 10}, {2, 0, 12, 10})));
    CHECK(m.iou[1] == doctest::Approx(box_iou({6, 0, 16, 10}, {1, 0, 11, 10})));
}

TEST_CASE("confidence ties go to the better-overlapping prediction") {
    const ImageRecord img = image("a", 100, 100, {{0, 0, 0, 10, 10}}, {{0, 3, 0, 13, 10, 0.5}, {0, 1, 0, 11, 10, 0.5}});
    const auto m = match_predictions(img);
    REQUIRE(m.prediction_of[0].has_value());
    CHECK(*m.prediction_of[0] == 1);
    CHECK(m.unmatched_prediction_indices == std::vector<std::size_t>{0});
}

TEST_CASE("predictions below the confidence floor are ignored") {
    const ImageRecord img = image("a", 100, 100, {{0, 0, 0, 10, 10}}, {{0, 0, 0, 10, 10, 0.2}, {0, 50, 50, 60, 60, 0.1}});
    const auto m = match_predictions(img, 0.3);
    CHECK(m.iou[0] == 0.0);
    CHECK(m.unmatched_prediction_indices.empty());
    const auto m0 = match_predictions(img, 0.0);
    CHECK(m0.iou[0] == 1.0);
    CHECK(m0.unmatched_prediction_indices == std::vector<std::size_t>{1});
}

TEST_CASE("greedy matching equals exhaustive matching on well-separated scenes") {
    // Objects are spaced so that each prediction overlaps exactly one object;
    // the greedy assignment is then optimal and must agree with enumeration.
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> jitter(-3.0, 3.0);
    std::uniform_real_distribution<double> conf(0.05, 1.0);
    std::bernoulli_distribution keep(0.8);
    for (int t = 0; t < 200; ++t) {
        ImageRecord img = image("x", 400, 100, {});
        for (int k = 0; k < 6; ++k) {
            const double x = 10.0 + 60.0 * k;
            img.ground_truth.push_back({{0, static_cast<std::uint32_t>(k)}, k % 2, {x, 20, x + 20, 40}});
            if (keep(rng)) {
                const double dx = jitter(rng);
                img.predictions.push_back({k % 2, {x + dx, 20 + jitter(rng), x + 20 + dx, 40}, conf(rng)});
            }
        }
        const auto m = match_predictions(img, 0.3);
        const auto best = oracle::exhaustive_match_iou(img, 0.3);
        for (std::size_t i = 0; i < best.size(); ++i) CHECK(m.iou[i] == doctest::Approx(best[i]).epsilon(1e-12));
    }
}

TEST_CASE("object_performance covers every ground-truth object") {
    const Dataset d = testutil::dataset(
        "d", {image("a", 100, 100, {{0, 0, 0, 10, 10}, {1, 20, 20, 30, 30}}), image("b", 100, 100, {{0, 0, 0, 5, 5}})});
    const auto perf = object_performance(d);
    CHECK(perf.size() == d.object_count());
    for (const auto& [id, v] : perf) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}
