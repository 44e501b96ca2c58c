#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ctxval/context.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace ctxval;
using testutil::image;

namespace {

bool same_cells(const PatchMask& m, const oracle::Grid& g) {
    for (int r = 0; r < m.spec().h; ++r)
        for (int c = 0; c < m.spec().w; ++c)
            if (m.at(r, c) != (g[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] != 0)) return false;
    return true;
}

ImageRecord random_image(std::mt19937_64& rng, int n, bool fractional) {
    std::uniform_real_distribution<double> pos(-20.0, 200.0);
    std::uniform_real_distribution<double> len(0.5, 60.0);
    std::uniform_int_distribution<int> cls(0, 1);
    ImageRecord img = image("r", 180, 150, {});
    for (int k = 0; k < n; ++k) {
        double x = pos(rng), y = pos(rng), w = len(rng), h = len(rng);
        if (!fractional) {
            x = std::round(x);
            y = std::round(y);
            w = std::max(1.0, std::round(w));
            h = std::max(1.0, std::round(h));
        }
        img.ground_truth.push_back({{0, static_cast<std::uint32_t>(k)}, cls(rng), {x, y, x + w, y + h}});
    }
    return img;
}

}  // namespace

TEST_CASE("isolated box fills exactly its own pixels") {
    const ImageRecord img = image("a", 500, 500, {{0, 100, 100, 110, 110}});
    const PatchMask m = extract_patch_mask(img, img.ground_truth[0], {120, 120});
    CHECK(m.count() == 100);
    // Center (105,105) sits at cell (60,60); the box covers pixels 100..109.
    CHECK(m.at(55, 55));
    CHECK(m.at(64, 64));
    CHECK_FALSE(m.at(54, 55));
    CHECK_FALSE(m.at(65, 60));
}

TEST_CASE("cells outside the image are empty") {
    const ImageRecord img = image("a", 50, 50, {{0, 0, 0, 50, 50}});
    const PatchMask m = extract_patch_mask(img, img.ground_truth[0], {120, 120});
    CHECK(m.count() == 2500);
}

TEST_CASE("similarity of a 10x10 box against a 10x20 box is one half") {
    const ImageRecord a = image("a", 500, 500, {{0, 100, 100, 110, 110}});
    const ImageRecord b = image("b", 500, 500, {{0, 100, 100, 110, 120}});
    const PatchMask pa = extract_patch_mask(a, a.ground_truth[0], {120, 120});
    const PatchMask pb = extract_patch_mask(b, b.ground_truth[0], {120, 120});
    // pb is anchored at y=110, so pa's rows 55..64 sit inside pb's rows 50..69.
    CHECK(overlap_counts(pa, pb).intersection == 100);
    CHECK(overlap_counts(pa, pb).union_ == 200);
    CHECK(similarity(pa, pb) == 0.5);
}

TEST_CASE("other classes are invisible in the patch") {
    const ImageRecord img = image("a", 500, 500, {{0, 100, 100, 110, 110}, {1, 120, 100, 130, 110}, {0, 80, 100, 90, 110}});
    const PatchMask m = extract_patch_mask(img, img.ground_truth[0], {120, 120});
    CHECK(m.count() == 200);
    const PatchMask g = extract_patch_mask(img, img.ground_truth[1], {120, 120});
    CHECK(g.count() == 100);
}

TEST_CASE("empty masks are identical and mismatched specs are rejected") {
    const ImageRecord img = image("a", 500, 500, {{0, 100.6, 100.6, 101.4, 101.4}});
    const PatchMask e = extract_patch_mask(img, img.ground_truth[0], {20, 20});
    CHECK(e.count() == 0);
    CHECK(similarity(e, e) == 1.0);
    const PatchMask other = extract_patch_mask(img, img.ground_truth[0], {20, 21});
    CHECK_THROWS_AS(similarity(e, other), std::invalid_argument);
}

TEST_CASE("masks match the raster oracle cell for cell") {
    std::mt19937_64 rng(123);
    const PatchSpec specs[] = {{120, 120}, {81, 33}, {1, 1}, {64, 65}, {7, 200}};
    for (int t = 0; t < 150; ++t) {
        const ImageRecord img = random_image(rng, 1 + t % 9, t % 2 == 0);
        const PatchSpec s = specs[t % 5];
        for (const auto& o : img.ground_truth) {
            const PatchMask m = extract_patch_mask(img, o, s);
            CHECK(same_cells(m, oracle::raster_mask(img, o, s.h, s.w)));
        }
    }
}

TEST_CASE("translating a scene leaves masks unchanged") {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> shift(-30, 30);
    for (int t = 0; t < 50; ++t) {
        ImageRecord img = random_image(rng, 6, t % 2 == 0);
        // Keep the scene well inside a large image so shifting never crosses a border.
        img.width = 2000;
        img.height = 2000;
        for (auto& o : img.ground_truth) o.box = {o.box.x_min + 500, o.box.y_min + 500, o.box.x_max + 500, o.box.y_max + 500};
        ImageRecord moved = img;
        const int dx = shift(rng), dy = shift(rng);
        for (auto& o : moved.ground_truth) o.box = {o.box.x_min + dx, o.box.y_min + dy, o.box.x_max + dx, o.box.y_max + dy};
        for (std::size_t k = 0; k < img.ground_truth.size(); ++k) {
            const PatchMask a = extract_patch_mask(img, img.ground_truth[k], {90, 90});
            const PatchMask b = extract_patch_mask(moved, moved.ground_truth[k], {90, 90});
            CHECK(a == b);
        }
    }
}

TEST_CASE("the worked five-object batch at theta 0.8") {
    // Reference: an isolated 40x40 box. Pool objects are isolated boxes sharing
    // the reference's top-left alignment, each in its own image.
    const Dataset ref = testutil::dataset("ref", {image("r", 500, 500, {{0, 100, 100, 140, 140}})});
    const Dataset pool = testutil::dataset(
        "pool", {image("p0", 500, 500, {{0, 100, 100, 140, 140}}), image("p1", 500, 500, {{0, 100, 100, 140, 134}}),
                 image("p2", 500, 500, {{0, 100, 100, 136, 135}}), image("p3", 500, 500, {{0, 100, 100, 140, 120}}),
                 image("p4", 500, 500, {{0, 100.6, 100.6, 101.4, 101.4}})});

    const auto& r = ref.images[0];
    const auto ro = oracle::raster_mask(r, r.ground_truth[0], 120, 120);
    std::vector<double> s;
    for (const auto& img : pool.images) s.push_back(oracle::raster_similarity(ro, oracle::raster_mask(img, img.ground_truth[0], 120, 120)));
    CHECK(s[0] == 1.0);
    CHECK(s[1] == doctest::Approx(0.85));
    CHECK(s[2] == doctest::Approx(0.7875));
    CHECK(s[3] == doctest::Approx(0.5));
    CHECK(s[4] == 0.0);

    const auto batch = build_batch(ref, ObjectId{0, 0}, pool, 0.8, {120, 120});
    CHECK(batch == std::vector<ObjectId>{{0, 0}, {1, 0}});
    CHECK(build_batch(ref, ObjectId{0, 0}, pool, 0.5, {120, 120}).size() == 4);
    CHECK(build_batch(ref, ObjectId{0, 0}, pool, 0.0, {120, 120}).size() == 5);
}

TEST_CASE("build_batch only considers the reference's class") {
    const Dataset ref = testutil::dataset("ref", {image("r", 500, 500, {{0, 100, 100, 140, 140}})});
    const Dataset pool = testutil::dataset("pool", {image("p", 500, 500, {{1, 100, 100, 140, 140}})});
    CHECK(build_batch(ref, ObjectId{0, 0}, pool, 0.0, {120, 120}).empty());
    CHECK_THROWS_AS(build_batch(ref, ObjectId{3, 0}, pool, 0.5, {120, 120}), std::out_of_range);
}
