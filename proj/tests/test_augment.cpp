#include <catch2/catch_amalgamated.hpp>

#include "slidemil/augment.hpp"

using namespace slidemil;

namespace {

Image random_tile(std::size_t w, std::size_t h, std::uint64_t seed) {
    Rng rng(seed);
    Image img(w, h);
    for (std::uint8_t& v : img.data) v = static_cast<std::uint8_t>(rng.below(256));
    return img;
}

}  // namespace

TEST_CASE("augmentation with zero magnitudes is the identity") {
    Image tile = random_tile(32, 32, 1);
    AugmentParams p;
    p.hed_alpha = 0.0;
    p.noise_sigma = 0.0;
    p.rotations = false;
    p.flips = false;
    auto out = augment(tile, p, 99);
    CHECK(out[0] == tile);
    CHECK(out[1] == tile);
}

TEST_CASE("same seed gives bit-identical augmentations") {
    Image tile = random_tile(48, 48, 2);
    AugmentParams p;  // defaults: everything on
    auto a = augment(tile, p, 1234);
    auto b = augment(tile, p, 1234);
    CHECK(a[0] == b[0]);
    CHECK(a[1] == b[1]);
    auto c = augment(tile, p, 1235);
    CHECK((c[0] == a[0] && c[1] == a[1]) == false);
}

TEST_CASE("augmentations change the image when enabled") {
    Image tile = random_tile(32, 32, 3);
    AugmentParams p;
    auto out = augment(tile, p, 7);
    CHECK(out[0].width == 32);
    CHECK(out[0].height == 32);
    CHECK_FALSE(out[0] == tile);
}

TEST_CASE("hed perturbation with unit scales approximates the identity") {
    // RGB -> OD -> HED -> OD -> RGB with all channel scales at 1 must
    // reproduce each byte after rounding.
    Image tile(16, 16);
    Rng rng(4);
    for (std::uint8_t& v : tile.data) v = static_cast<std::uint8_t>(1 + rng.below(255));
    Image back = detail::hed_perturb(tile, {1.0, 1.0, 1.0});
    std::size_t off_by_one = 0;
    for (std::size_t i = 0; i < tile.data.size(); ++i) {
        const int d = std::abs(static_cast<int>(tile.data[i]) - static_cast<int>(back.data[i]));
        CHECK(d <= 1);
        off_by_one += static_cast<std::size_t>(d);
    }
    CHECK(off_by_one <= tile.data.size() / 100);  // almost all exact
}

TEST_CASE("noise-only augmentation stays close to the source") {
    Image tile(32, 32, {128, 128, 128});
    AugmentParams p;
    p.hed_alpha = 0.0;
    p.noise_sigma = 3.0;
    p.rotations = false;
    p.flips = false;
    Rng rng(5);
    Image out = augment_one(tile, p, rng);
    double mean_abs = 0.0;
    for (std::size_t i = 0; i < out.data.size(); ++i)
        mean_abs += std::abs(static_cast<int>(out.data[i]) - 128);
    mean_abs /= static_cast<double>(out.data.size());
    CHECK(mean_abs > 0.5);
    CHECK(mean_abs < 6.0);
}
