#include <catch2/catch_amalgamated.hpp>

#include <hierva/image.hpp>
#include <hierva/image_registry.hpp>
#include <hierva/rng.hpp>

#include "oracles.hpp"

using namespace hierva;

namespace {

RasterImage random_image(Rng& rng, int max_side = 40) {
    int w = static_cast<int>(rng.uniform_int(1, max_side));
    int h = static_cast<int>(rng.uniform_int(1, max_side));
    RasterImage img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.set(x, y,
                    {static_cast<uint8_t>(rng.uniform_int(0, 255)),
                     static_cast<uint8_t>(rng.uniform_int(0, 255)),
                     static_cast<uint8_t>(rng.uniform_int(0, 255)), 255});
    return img;
}

RasterImage gradient_image(int w, int h) {
    RasterImage img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.set(x, y,
                    {static_cast<uint8_t>(x * 7 % 256), static_cast<uint8_t>(y * 13 % 256),
                     static_cast<uint8_t>((x + y) % 256), 255});
    return img;
}

}  // namespace

TEST_CASE("identity crop is pixel-identical") {
    RasterImage img = gradient_image(100, 100);
    RasterImage out = crop_and_resize(img, BBox{0, 0, 100, 100}, 0);
    CHECK(out.same_pixels(img));
}

TEST_CASE("interior crop equals the brute-force pixel copy") {
    RasterImage img = gradient_image(100, 100);
    RasterImage out = crop_and_resize(img, BBox{10, 20, 60, 80}, 0);
    REQUIRE(out.width == 50);
    REQUIRE(out.height == 60);
    auto expected = oracle::pixel_copy_crop(img, {10, 20, 60, 80});
    CHECK(out.same_pixels(expected));
}

TEST_CASE("out-of-bounds boxes clamp to the image") {
    RasterImage img = gradient_image(100, 100);
    IntBox clamped;
    RasterImage out = crop_and_resize(img, BBox{90, 90, 150, 150}, 0, ResizeFilter::Nearest,
                                      &clamped);
    CHECK(clamped == IntBox{90, 90, 100, 100});
    CHECK(out.width == 10);
    CHECK(out.height == 10);
}

TEST_CASE("degenerate boxes throw") {
    RasterImage img = gradient_image(50, 50);
    CHECK_THROWS_AS(crop_and_resize(img, BBox{10, 10, 10, 40}, 0), DegenerateBBox);
    CHECK_THROWS_AS(crop_and_resize(img, BBox{200, 200, 300, 300}, 0), DegenerateBBox);
    CHECK_THROWS_AS(crop_and_resize(img, BBox{40, 10, 10, 40}, 0), DegenerateBBox);
}

TEST_CASE("randomized crops match the per-pixel oracle exactly") {
    Rng rng(1234);
    int checked = 0;
    for (int iter = 0; iter < 1000; ++iter) {
        RasterImage img = random_image(rng);
        BBox b{rng.uniform(-20, img.width + 20), rng.uniform(-20, img.height + 20),
               rng.uniform(-20, img.width + 20), rng.uniform(-20, img.height + 20)};
        if (iter % 3 != 0) {  // keep some reversed/degenerate boxes in the mix
            if (b.x1 > b.x2) std::swap(b.x1, b.x2);
            if (b.y1 > b.y2) std::swap(b.y1, b.y2);
        }
        auto expected_box =
            oracle::clamp_interval(b.x1, b.y1, b.x2, b.y2, img.width, img.height);
        auto got_box = clamp_bbox(b, img.width, img.height);
        REQUIRE(got_box.has_value() == expected_box.has_value());
        if (!expected_box) {
            CHECK_THROWS_AS(crop_and_resize(img, b, 0), DegenerateBBox);
            continue;
        }
        CHECK(got_box->x1 == expected_box->x1);
        CHECK(got_box->y1 == expected_box->y1);
        CHECK(got_box->x2 == expected_box->x2);
        CHECK(got_box->y2 == expected_box->y2);
        RasterImage out = crop_and_resize(img, b, 0);
        CHECK(out.same_pixels(oracle::pixel_copy_crop(img, *expected_box)));
        ++checked;
    }
    CHECK(checked > 300);  // enough non-degenerate samples
}

TEST_CASE("crop idempotence: re-cropping the full box changes nothing") {
    Rng rng(777);
    for (int iter = 0; iter < 50; ++iter) {
        RasterImage img = random_image(rng);
        BBox b{rng.uniform(-5, img.width + 5), rng.uniform(-5, img.height + 5),
               rng.uniform(-5, img.width + 5), rng.uniform(-5, img.height + 5)};
        if (!clamp_bbox(b, img.width, img.height)) continue;
        RasterImage once = crop_and_resize(img, b, 0);
        RasterImage twice = crop_and_resize(
            once, BBox{0, 0, double(once.width), double(once.height)}, 0);
        CHECK(twice.same_pixels(once));
    }
}

TEST_CASE("min-side upscale lands the smaller side exactly, aspect preserved") {
    RasterImage img = gradient_image(100, 100);
    RasterImage out = crop_and_resize(img, BBox{0, 0, 40, 30}, 60);
    CHECK(out.height == 60);  // smaller side 30 -> 60
    CHECK(out.width == 80);   // 40 * (60/30)
    // Nearest-neighbor oracle: out(x, y) = src(x * sw / ow, y * sh / oh).
    RasterImage plain = crop_and_resize(img, BBox{0, 0, 40, 30}, 0);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) {
            Rgba expected = plain.at(x * 40 / 80, y * 30 / 60);
            REQUIRE(out.at(x, y) == expected);
        }
}

TEST_CASE("no resize when the crop is already large enough") {
    RasterImage img = gradient_image(100, 100);
    RasterImage out = crop_and_resize(img, BBox{0, 0, 80, 70}, 60);
    CHECK(out.width == 80);
    CHECK(out.height == 70);
}

TEST_CASE("registry stores the original and rejects a second one") {
    ImageRegistry reg;
    reg.register_original(gradient_image(800, 600));
    CHECK(reg.resolve(ImageRef{0})->width == 800);
    CHECK_THROWS_AS(reg.register_original(gradient_image(10, 10)), DoubleInit);
}

TEST_CASE("unresolved refs throw before any crop exists") {
    ImageRegistry reg;
    reg.register_original(gradient_image(20, 20));
    CHECK_THROWS_AS(reg.resolve(ImageRef{1}), UnresolvedRef);
    CHECK_FALSE(reg.resolvable(ImageRef{3}));
}

TEST_CASE("latest crop per worker wins; workers are independent") {
    ImageRegistry reg;
    reg.register_original(gradient_image(100, 100));

    reg.record_crop(2, reg.crop(ImageRef{0}, BBox{0, 0, 10, 10}, 0));
    reg.record_crop(2, reg.crop(ImageRef{0}, BBox{0, 0, 30, 30}, 0));
    reg.record_crop(5, reg.crop(ImageRef{0}, BBox{0, 0, 50, 20}, 0));

    CHECK(reg.resolve(ImageRef{2})->width == 30);
    CHECK(reg.resolve(ImageRef{5})->width == 50);
    CHECK_THROWS_AS(reg.resolve(ImageRef{4}), UnresolvedRef);
    CHECK(reg.records().size() == 4);  // original + 3 crops kept for replay
}

TEST_CASE("record_crop rejects worker id 0") {
    ImageRegistry reg;
    reg.register_original(gradient_image(10, 10));
    CHECK_THROWS_AS(reg.record_crop(0, reg.crop(ImageRef{0}, BBox{0, 0, 5, 5}, 0)),
                    std::invalid_argument);
}

TEST_CASE("lineage chains terminate at the original") {
    ImageRegistry reg;
    reg.register_original(gradient_image(100, 100));
    reg.record_crop(1, reg.crop(ImageRef{0}, BBox{0, 0, 60, 60}, 0));
    reg.record_crop(2, reg.crop(ImageRef{1}, BBox{5, 5, 40, 40}, 0));
    reg.record_crop(3, reg.crop(ImageRef{2}, BBox{1, 1, 20, 20}, 0));

    auto chain = reg.lineage(static_cast<int>(reg.records().size()) - 1);
    REQUIRE(chain.size() == 4);
    CHECK(chain.back() == 0);
    CHECK(reg.records()[chain.back()].worker_id == 0);
    // Chain length never exceeds the number of records.
    CHECK(chain.size() <= reg.records().size());
}

TEST_CASE("chained crops reference the crop that was latest at crop time") {
    ImageRegistry reg;
    reg.register_original(gradient_image(100, 100));
    reg.record_crop(1, reg.crop(ImageRef{0}, BBox{0, 0, 60, 60}, 0));
    reg.record_crop(2, reg.crop(ImageRef{1}, BBox{0, 0, 30, 30}, 0));
    // Worker 1 crops again; worker 2's existing parent must still be the
    // first worker-1 crop.
    reg.record_crop(1, reg.crop(ImageRef{0}, BBox{50, 50, 90, 90}, 0));

    const auto& rec2 = reg.records()[2];
    CHECK(rec2.worker_id == 2);
    CHECK(rec2.parent == 1);
    CHECK(reg.records()[1].image->width == 60);
}
