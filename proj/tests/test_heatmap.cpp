#include <catch2/catch_amalgamated.hpp>

#include <cstdio>

#include "slidemil/heatmap.hpp"
#include "slidemil/png_io.hpp"
#include "slidemil/rng.hpp"

using namespace slidemil;

namespace {

// 4x4 grid at a 2048 level over a 64px thumbnail
PatchScoreMap grid_map(const std::vector<std::pair<std::uint32_t, std::uint32_t>>& cells,
                       const std::vector<double>& attention) {
    PatchScoreMap map;
    map.level = MagTag::x10;
    map.level_w = map.level_h = 2048;
    map.thumb_w = map.thumb_h = 64;
    for (auto [col, row] : cells) map.coords.push_back({MagTag::x10, col, row});
    map.attention = attention;
    return map;
}

}  // namespace

TEST_CASE("tile footprints tile the thumbnail exactly") {
    // every cell painted -> every pixel blended; footprints match the
    // inverse of the thumb->tile mapping
    std::vector<std::pair<std::uint32_t, std::uint32_t>> cells;
    std::vector<double> attention;
    for (std::uint32_t r = 0; r < 4; ++r)
        for (std::uint32_t c = 0; c < 4; ++c) {
            cells.push_back({c, r});
            attention.push_back(1.0 / 16.0);
        }
    PatchScoreMap map = grid_map(cells, attention);
    Image thumb(64, 64, {0, 0, 0});
    Image out = render_attention(map, thumb);
    for (std::size_t y = 0; y < 64; ++y)
        for (std::size_t x = 0; x < 64; ++x) CHECK_FALSE(out.get(x, y) == Rgb{0, 0, 0});

    // footprint of cell (1,2) is exactly x in [16,32), y in [32,48)
    PatchScoreMap one = grid_map({{1, 2}}, {1.0});
    Image painted = render_attention(one, thumb);
    for (std::size_t y = 0; y < 64; ++y)
        for (std::size_t x = 0; x < 64; ++x) {
            const bool inside = x >= 16 && x < 32 && y >= 32 && y < 48;
            CHECK((painted.get(x, y) == Rgb{0, 0, 0}) == !inside);
        }
}

TEST_CASE("attention normalization boundary rules") {
    // singleton -> colormap maximum; all-equal -> mid color
    Image thumb(64, 64, {0, 0, 0});

    Image single = render_attention(grid_map({{0, 0}}, {1.0}), thumb);
    Image uniform = render_attention(
        grid_map({{0, 0}, {1, 0}}, {0.5, 0.5}), thumb);
    // compare against the blended colormap endpoints
    const Rgb max_blend = single.get(0, 0);
    const Rgb mid_blend = uniform.get(0, 0);
    CHECK_FALSE(max_blend == mid_blend);
    CHECK(uniform.get(0, 0) == uniform.get(20, 0));  // both tiles mid color
}

TEST_CASE("attention rendering is deterministic") {
    Rng rng(3);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> cells;
    std::vector<double> attention;
    double sum = 0.0;
    for (std::uint32_t r = 0; r < 4; ++r)
        for (std::uint32_t c = 0; c < 2; ++c) {
            cells.push_back({c, r});
            attention.push_back(rng.uniform());
            sum += attention.back();
        }
    for (double& a : attention) a /= sum;
    PatchScoreMap map = grid_map(cells, attention);
    Image thumb(64, 64, {120, 120, 120});
    write_png(render_attention(map, thumb), "heat_a.png");
    write_png(render_attention(map, thumb), "heat_b.png");
    auto slurp = [](const char* p) {
        std::ifstream f(p, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    };
    CHECK(slurp("heat_a.png") == slurp("heat_b.png"));
    std::remove("heat_a.png");
    std::remove("heat_b.png");
}

TEST_CASE("contribution colors split exactly at one half") {
    PatchScoreMap map = grid_map({{0, 0}, {1, 0}, {2, 0}}, {0.4, 0.3, 0.3});
    map.bounded_contribs = std::vector<double>{0.5, 0.49999, 0.75};
    Image thumb(64, 64, {0, 0, 0});
    Image out = render_contributions(map, thumb);
    const Rgb at_half = out.get(0, 0);    // 0.5 -> red side
    const Rgb below = out.get(16, 0);     // 0.49999 -> blue side
    const Rgb above = out.get(32, 0);     // 0.75 -> red side
    CHECK(at_half == above);
    CHECK_FALSE(at_half == below);
    // red channel dominates on the excitatory side, blue on the inhibitory
    CHECK(at_half.r > at_half.b);
    CHECK(below.b > below.r);
}

TEST_CASE("flipping a contribution across the boundary flips only that tile") {
    PatchScoreMap map = grid_map({{0, 0}, {1, 0}}, {0.5, 0.5});
    map.bounded_contribs = std::vector<double>{0.6, 0.6};
    Image thumb(64, 64, {0, 0, 0});
    Image before = render_contributions(map, thumb);
    (*map.bounded_contribs)[1] = 0.4;
    Image after = render_contributions(map, thumb);
    CHECK(before.get(0, 0) == after.get(0, 0));
    CHECK_FALSE(before.get(16, 0) == after.get(16, 0));
}

TEST_CASE("contributions are unsupported for attention-only models") {
    PatchScoreMap map = grid_map({{0, 0}}, {1.0});
    Image thumb(64, 64);
    CHECK_THROWS_AS(render_contributions(map, thumb), DataError);
}

TEST_CASE("empty score maps are rejected") {
    PatchScoreMap map;
    map.thumb_w = map.thumb_h = 64;
    map.level_w = map.level_h = 2048;
    Image thumb(64, 64);
    CHECK_THROWS_AS(render_attention(map, thumb), EmptyBagError);
}

TEST_CASE("score maps fold augmented views by coordinate") {
    EmbeddingRecord rec;
    rec.slide_id = "s";
    rec.label = 1;
    rec.embeddings = Tensor2D(6, 4);
    rec.coords = {{MagTag::x10, 0, 0}, {MagTag::x10, 0, 0}, {MagTag::x10, 0, 0},
                  {MagTag::x10, 1, 0}, {MagTag::x10, 1, 0}, {MagTag::x10, 1, 0}};
    rec.aug_flags = {0, 1, 2, 0, 1, 2};
    BagOutput out;
    out.attention = {0.1, 0.2, 0.1, 0.3, 0.2, 0.1};
    out.bounded_contribs = std::vector<double>{0.7, 0.1, 0.1, 0.3, 0.9, 0.9};
    PatchScoreMap map = build_score_map(rec, out, MagTag::x10, 2048, 2048, 64, 64);
    REQUIRE(map.coords.size() == 2);
    CHECK(map.attention[0] == Catch::Approx(0.4));
    CHECK(map.attention[1] == Catch::Approx(0.6));
    // contributions come from the original (non-augmented) view
    CHECK((*map.bounded_contribs)[0] == 0.7);
    CHECK((*map.bounded_contribs)[1] == 0.3);
}
