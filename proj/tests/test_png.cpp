#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "slidemil/png_io.hpp"
#include "slidemil/rng.hpp"

using namespace slidemil;

TEST_CASE("png round-trip preserves pixels") {
    Rng rng(1);
    Image img(37, 23);
    for (std::uint8_t& v : img.data) v = static_cast<std::uint8_t>(rng.below(256));
    write_png(img, "roundtrip.png");
    Image back = read_png("roundtrip.png");
    CHECK(back == img);
    std::remove("roundtrip.png");
}

TEST_CASE("png encoding is byte-deterministic") {
    Rng rng(2);
    Image img(64, 64);
    for (std::uint8_t& v : img.data) v = static_cast<std::uint8_t>(rng.below(256));
    write_png(img, "det_a.png");
    write_png(img, "det_b.png");
    auto slurp = [](const char* p) {
        std::ifstream f(p, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    };
    CHECK(slurp("det_a.png") == slurp("det_b.png"));
    std::remove("det_a.png");
    std::remove("det_b.png");
}

TEST_CASE("png reader rejects non-png input") {
    {
        std::ofstream f("bogus.png", std::ios::binary);
        f << "definitely not a png";
    }
    CHECK_THROWS_AS(read_png("bogus.png"), FormatError);
    std::remove("bogus.png");
    CHECK_THROWS_AS(read_png("missing_file.png"), IoError);
}

TEST_CASE("image transforms compose as expected") {
    Rng rng(3);
    Image img(16, 9);
    for (std::uint8_t& v : img.data) v = static_cast<std::uint8_t>(rng.below(256));
    Image r = img;
    for (int i = 0; i < 4; ++i) r = rotate90(r);
    CHECK(r == img);
    CHECK(flip_horizontal(flip_horizontal(img)) == img);
    CHECK(flip_vertical(flip_vertical(img)) == img);
}
