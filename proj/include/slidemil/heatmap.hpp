#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "slidemil/image.hpp"
#include "slidemil/models.hpp"
#include "slidemil/store.hpp"
#include "slidemil/tiles.hpp"

namespace slidemil {

// Per-tile model scores positioned on the slide grid, ready to paint onto
// the thumbnail. Coordinates are unique; augmented views must be folded
// into their source tile before building the map.
struct PatchScoreMap {
    MagTag level = MagTag::x5;
    std::vector<TileCoord> coords;
    std::vector<double> attention;                         // simplex over tiles
    std::optional<std::vector<double>> bounded_contribs;   // in (0,1), additive models
    std::size_t level_w = 0, level_h = 0;                  // dims of `level`
    std::size_t thumb_w = 0, thumb_h = 0;
};

// Fold a bag forward into a PatchScoreMap: attention sums over the views of
// each tile (summing preserves the simplex), bounded contributions use the
// original (non-augmented) view of each tile.
inline PatchScoreMap build_score_map(const EmbeddingRecord& rec, const BagOutput& out,
                                     MagTag level, std::size_t level_w, std::size_t level_h,
                                     std::size_t thumb_w, std::size_t thumb_h) {
    if (rec.tiles() != out.attention.size())
        throw ShapeError("record rows and attention length differ");
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> index;  // (row,col) -> slot
    PatchScoreMap map;
    map.level = level;
    map.level_w = level_w;
    map.level_h = level_h;
    map.thumb_w = thumb_w;
    map.thumb_h = thumb_h;
    if (out.bounded_contribs) map.bounded_contribs.emplace();
    for (std::size_t i = 0; i < rec.tiles(); ++i) {
        const TileCoord& c = rec.coords[i];
        auto [it, inserted] = index.try_emplace({c.row, c.col}, map.coords.size());
        if (inserted) {
            map.coords.push_back(c);
            map.attention.push_back(0.0);
            if (map.bounded_contribs) map.bounded_contribs->push_back(0.5);
        }
        map.attention[it->second] += out.attention[i];
        if (map.bounded_contribs && rec.aug_flags[i] == 0)
            (*map.bounded_contribs)[it->second] = (*out.bounded_contribs)[i];
    }
    return map;
}

namespace heatdetail {

// Anchors of the viridis colormap; linear interpolation between them.
inline constexpr std::uint8_t kViridis[9][3] = {
    {68, 1, 84},   {72, 40, 120},  {62, 74, 137},  {49, 104, 142}, {38, 130, 142},
    {31, 158, 137}, {53, 183, 121}, {109, 205, 89}, {253, 231, 37},
};

inline Rgb viridis(double v) {
    v = std::clamp(v, 0.0, 1.0);
    const double pos = v * 8.0;
    const std::size_t lo = std::min<std::size_t>(7, static_cast<std::size_t>(pos));
    const double f = pos - static_cast<double>(lo);
    Rgb out;
    out.r = static_cast<std::uint8_t>(kViridis[lo][0] + f * (kViridis[lo + 1][0] - kViridis[lo][0]));
    out.g = static_cast<std::uint8_t>(kViridis[lo][1] + f * (kViridis[lo + 1][1] - kViridis[lo][1]));
    out.b = static_cast<std::uint8_t>(kViridis[lo][2] + f * (kViridis[lo + 1][2] - kViridis[lo][2]));
    return out;
}

inline constexpr double kOverlayAlpha = 0.6;

inline Rgb blend(Rgb base, Rgb overlay) {
    auto mix = [](std::uint8_t b, std::uint8_t o) {
        return static_cast<std::uint8_t>((1.0 - kOverlayAlpha) * b + kOverlayAlpha * o + 0.5);
    };
    return {mix(base.r, overlay.r), mix(base.g, overlay.g), mix(base.b, overlay.b)};
}

// Paint tile colors into their thumbnail footprints. The footprint is the
// exact inverse image of the thumb->tile mapping, so painted regions tile
// the thumbnail without gaps or overlaps.
template <class ColorFn>
inline Image paint(const PatchScoreMap& map, const Image& thumb, ColorFn&& color_of) {
    if (thumb.width != map.thumb_w || thumb.height != map.thumb_h)
        throw ShapeError("thumbnail dims disagree with the score map");
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> index;
    for (std::size_t i = 0; i < map.coords.size(); ++i)
        index.emplace(std::pair{map.coords[i].row, map.coords[i].col}, i);
    Image out = thumb;
    for (std::size_t y = 0; y < thumb.height; ++y) {
        for (std::size_t x = 0; x < thumb.width; ++x) {
            const std::uint32_t col =
                static_cast<std::uint32_t>((x * map.level_w) / (map.thumb_w * kTileSize));
            const std::uint32_t row =
                static_cast<std::uint32_t>((y * map.level_h) / (map.thumb_h * kTileSize));
            auto it = index.find({row, col});
            if (it == index.end()) continue;  // tile absent from the bag
            out.set(x, y, blend(thumb.get(x, y), color_of(it->second)));
        }
    }
    return out;
}

}  // namespace heatdetail

// Continuous attention heatmap: per-slide min-max normalization through the
// fixed colormap. A singleton maps to 1; an all-equal map renders mid-scale.
inline Image render_attention(const PatchScoreMap& map, const Image& thumb) {
    if (map.coords.empty()) throw EmptyBagError("empty score map");
    const auto [lo_it, hi_it] = std::minmax_element(map.attention.begin(), map.attention.end());
    const double lo = *lo_it, hi = *hi_it;
    return heatdetail::paint(map, thumb, [&](std::size_t i) {
        const double v = hi > lo ? (map.attention[i] - lo) / (hi - lo)
                                 : (map.coords.size() == 1 ? 1.0 : 0.5);
        return heatdetail::viridis(v);
    });
}

// Two-color contribution overlay: excitatory (contrib >= 0.5) red,
// inhibitory (< 0.5) blue.
inline Image render_contributions(const PatchScoreMap& map, const Image& thumb) {
    if (map.coords.empty()) throw EmptyBagError("empty score map");
    if (!map.bounded_contribs)
        throw DataError("model provides no patch contributions (attention-only model)");
    const Rgb red{220, 40, 30}, blue{40, 70, 220};
    return heatdetail::paint(map, thumb, [&](std::size_t i) {
        return (*map.bounded_contribs)[i] >= 0.5 ? red : blue;
    });
}

}  // namespace slidemil
