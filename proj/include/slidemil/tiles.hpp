#pragma once

#include <algorithm>
#include <set>
#include <vector>

#include "slidemil/image.hpp"
#include "slidemil/mask.hpp"

namespace slidemil {

inline constexpr std::size_t kTileSize = 512;

// One tile of a pyramid level: grid indices plus its pixel rectangle.
struct TileRef {
    MagTag level = MagTag::x5;
    std::uint32_t col = 0;
    std::uint32_t row = 0;
    std::uint32_t px = 0, py = 0, pw = 0, ph = 0;

    TileCoord coord() const { return {level, col, row}; }
    friend bool operator==(const TileRef&, const TileRef&) = default;
};

inline std::size_t grid_cols(std::size_t level_w) { return (level_w + kTileSize - 1) / kTileSize; }
inline std::size_t grid_rows(std::size_t level_h) { return (level_h + kTileSize - 1) / kTileSize; }

inline TileRef make_tile(MagTag level, std::uint32_t col, std::uint32_t row, std::size_t level_w,
                         std::size_t level_h) {
    TileRef t;
    t.level = level;
    t.col = col;
    t.row = row;
    t.px = static_cast<std::uint32_t>(col * kTileSize);
    t.py = static_cast<std::uint32_t>(row * kTileSize);
    t.pw = static_cast<std::uint32_t>(std::min(kTileSize, level_w - t.px));
    t.ph = static_cast<std::uint32_t>(std::min(kTileSize, level_h - t.py));
    return t;
}

// Map one thumbnail pixel to the tile containing it at the target level:
// scale by (target/thumb), divide by the tile size, floor. Exact integer
// arithmetic throughout.
inline TileRef thumb_to_tile(std::size_t x, std::size_t y, std::size_t thumb_w,
                             std::size_t thumb_h, MagTag level, std::size_t level_w,
                             std::size_t level_h) {
    if (x >= thumb_w || y >= thumb_h) throw ShapeError("thumb pixel outside thumbnail");
    const std::size_t col = (x * level_w) / (thumb_w * kTileSize);
    const std::size_t row = (y * level_h) / (thumb_h * kTileSize);
    return make_tile(level, static_cast<std::uint32_t>(col), static_cast<std::uint32_t>(row),
                     level_w, level_h);
}

// All distinct tiles seeded by the mask's tissue pixels, ordered (row, col).
inline std::vector<TileRef> tiles_from_mask(const TissueMask& mask, MagTag level,
                                            std::size_t level_w, std::size_t level_h) {
    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;  // (row, col)
    for (std::size_t y = 0; y < mask.height; ++y)
        for (std::size_t x = 0; x < mask.width; ++x)
            if (mask.get(x, y)) {
                TileRef t = thumb_to_tile(x, y, mask.width, mask.height, level, level_w, level_h);
                seen.insert({t.row, t.col});
            }
    std::vector<TileRef> out;
    out.reserve(seen.size());
    for (auto [row, col] : seen) out.push_back(make_tile(level, col, row, level_w, level_h));
    return out;
}

// Children of a tile at the next (2x) level: the four quadrant tiles,
// clipped to the child grid.
inline std::vector<TileRef> child_tiles(const TileRef& tile, MagTag child_level,
                                        std::size_t child_w, std::size_t child_h) {
    const std::size_t cols = grid_cols(child_w), rows = grid_rows(child_h);
    std::vector<TileRef> out;
    for (std::uint32_t dr = 0; dr < 2; ++dr)
        for (std::uint32_t dc = 0; dc < 2; ++dc) {
            const std::uint32_t c = 2 * tile.col + dc;
            const std::uint32_t r = 2 * tile.row + dr;
            if (c < cols && r < rows) out.push_back(make_tile(child_level, c, r, child_w, child_h));
        }
    std::sort(out.begin(), out.end(), [](const TileRef& a, const TileRef& b) {
        return std::pair(a.row, a.col) < std::pair(b.row, b.col);
    });
    return out;
}

// Pad an undersized edge tile to the full tile size with the slide's
// average background color; content stays at the top-left.
inline Image pad_tile(const Image& tile, Rgb background) {
    if (tile.width > kTileSize || tile.height > kTileSize)
        throw ShapeError("pad_tile: input larger than the tile size");
    if (tile.width == 0 || tile.height == 0) throw ShapeError("pad_tile: empty input");
    if (tile.width == kTileSize && tile.height == kTileSize) return tile;
    Image out(kTileSize, kTileSize, background);
    for (std::size_t y = 0; y < tile.height; ++y)
        for (std::size_t x = 0; x < tile.width; ++x) out.set(x, y, tile.get(x, y));
    return out;
}

// Share of tile pixels at or below the slide's Otsu threshold.
inline double tissue_fraction(const Image& tile, std::uint8_t otsu_thr) {
    std::size_t tissue = 0;
    for (std::size_t i = 0; i < tile.width * tile.height; ++i)
        if (luma({tile.data[3 * i], tile.data[3 * i + 1], tile.data[3 * i + 2]}) <= otsu_thr)
            ++tissue;
    return static_cast<double>(tissue) / static_cast<double>(tile.width * tile.height);
}

inline bool tissue_fraction_gate(const Image& tile, std::uint8_t otsu_thr, double threshold) {
    if (threshold < 0.0 || threshold > 1.0) throw ConfigError("tissue fraction threshold in [0,1]");
    return tissue_fraction(tile, otsu_thr) >= threshold;
}

}  // namespace slidemil
