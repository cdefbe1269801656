#include <doctest.h>

#include <filesystem>
#include <random>

#include "lesionfuse/errors.hpp"
#include "lesionfuse/image.hpp"
#include "oracles.hpp"

using namespace lesionfuse;

namespace {

ImageRGB solid(std::size_t w, std::size_t h, double r, double g, double b) {
    ImageRGB img;
    img.width = w;
    img.height = h;
    img.px.resize(w * h * 3);
    for (std::size_t i = 0; i < w * h; ++i) {
        img.px[i * 3] = r;
        img.px[i * 3 + 1] = g;
        img.px[i * 3 + 2] = b;
    }
    return img;
}

AugmentParams identity_params() {
    AugmentParams p;
    p.flip_h_prob = 0.0;
    p.flip_v_prob = 0.0;
    p.rotation_max = 0.0;
    p.translate_max = 0.0;
    p.scale_low = 1.0;
    p.scale_high = 1.0;
    p.seed = 7;
    return p;
}

}  // namespace

TEST_CASE("grayscale of white is 255 and of pure red is 76.245") {
    const auto white = to_grayscale(solid(3, 2, 255, 255, 255));
    for (double v : white.px) CHECK(v == doctest::Approx(255.0));
    const auto red = to_grayscale(solid(3, 2, 255, 0, 0));
    for (double v : red.px) CHECK(v == doctest::Approx(76.245));
}

TEST_CASE("grayscale matches the per-pixel weighted sum on a random image") {
    const auto img = oracle::random_rgb(4, 4, 21);
    const auto gray = to_grayscale(img);
    for (std::size_t y = 0; y < 4; ++y) {
        for (std::size_t x = 0; x < 4; ++x) {
            const double expect = 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) +
                                  0.114 * img.at(x, y, 2);
            CHECK(gray.at(x, y) == doctest::Approx(expect).epsilon(1e-12));
        }
    }
    for (double v : gray.px) {
        CHECK(v >= 0.0);
        CHECK(v <= 255.0);
    }
}

TEST_CASE("prepare_input output always has the target size") {
    const auto img = oracle::random_rgb(300, 225, 3);  // the dataset geometry
    for (const auto strategy : {PrepareStrategy::res, PrepareStrategy::cr1}) {
        PrepareOptions opts;
        opts.strategy = strategy;
        opts.target_width = 224;
        opts.target_height = 224;
        const auto out = prepare_input(img, opts);
        CHECK(out.width == 224);
        CHECK(out.height == 224);
    }
}

TEST_CASE("cr1 on a 200x150 image is crop-identity then resize") {
    const auto img = oracle::random_rgb(200, 150, 5);
    PrepareOptions cr1;
    cr1.strategy = PrepareStrategy::cr1;
    cr1.target_width = 200;
    cr1.target_height = 150;
    // Crop box equals the image and the resize is same-size, so the whole
    // chain must be an exact copy.
    const auto out = prepare_input(img, cr1);
    CHECK(out.px == img.px);
}

TEST_CASE("constant image stays constant under either strategy") {
    const auto img = solid(50, 40, 12, 200, 99);
    for (const auto strategy : {PrepareStrategy::res, PrepareStrategy::cr1}) {
        PrepareOptions opts;
        opts.strategy = strategy;
        opts.target_width = 17;
        opts.target_height = 23;
        const auto out = prepare_input(img, opts);
        for (std::size_t i = 0; i < out.px.size(); i += 3) {
            CHECK(out.px[i] == doctest::Approx(12.0));
            CHECK(out.px[i + 1] == doctest::Approx(200.0));
            CHECK(out.px[i + 2] == doctest::Approx(99.0));
        }
    }
}

TEST_CASE("cr1 crop box is clamped when the source is smaller") {
    const auto img = oracle::random_rgb(60, 40, 9);  // smaller than 200x150
    PrepareOptions opts;
    opts.strategy = PrepareStrategy::cr1;
    opts.target_width = 32;
    opts.target_height = 32;
    const auto out = prepare_input(img, opts);
    CHECK(out.width == 32);
    CHECK(out.height == 32);
}

TEST_CASE("augment with identity parameters is the identity") {
    const auto img = oracle::random_rgb(13, 9, 31);
    const auto out = augment(img, identity_params(), 4);
    CHECK(out.px == img.px);
}

TEST_CASE("augment is deterministic in (seed, draw_index)") {
    const auto img = oracle::random_rgb(16, 16, 32);
    AugmentParams p;  // defaults: everything enabled
    p.seed = 123;
    const auto a = augment(img, p, 9);
    const auto b = augment(img, p, 9);
    CHECK(a.px == b.px);
    const auto c = augment(img, p, 10);
    CHECK(a.px != c.px);
}

TEST_CASE("forced horizontal flip mirrors columns exactly") {
    const auto img = oracle::random_rgb(7, 5, 33);
    auto p = identity_params();
    p.flip_h_prob = 1.0;
    const auto out = augment(img, p, 0);
    for (std::size_t y = 0; y < img.height; ++y)
        for (std::size_t x = 0; x < img.width; ++x)
            for (std::size_t ch = 0; ch < 3; ++ch)
                CHECK(out.at(x, y, ch) == img.at(img.width - 1 - x, y, ch));
}

TEST_CASE("augment validates parameter ranges") {
    const auto img = solid(4, 4, 0, 0, 0);
    AugmentParams bad = identity_params();
    bad.flip_h_prob = 1.5;
    CHECK_THROWS_AS(static_cast<void>(augment(img, bad, 0)), ConfigError);
    bad = identity_params();
    bad.scale_low = 0.0;
    CHECK_THROWS_AS(static_cast<void>(augment(img, bad, 0)), ConfigError);
}

TEST_CASE("png round trip preserves integer pixels") {
    const auto dir = std::filesystem::temp_directory_path() / "lesionfuse_test_png";
    std::filesystem::create_directories(dir);
    const auto img = oracle::random_rgb(20, 14, 77);
    const auto path = dir / "roundtrip.png";
    save_image_png(path, img);
    const auto back = load_image(path);
    REQUIRE(back.width == img.width);
    REQUIRE(back.height == img.height);
    CHECK(back.px == img.px);
    std::filesystem::remove_all(dir);
}

TEST_CASE("loading a missing image reports a data error") {
    CHECK_THROWS_AS(static_cast<void>(load_image("/nonexistent/nope.png")), DataError);
}
