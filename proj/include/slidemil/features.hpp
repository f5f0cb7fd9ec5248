#pragma once

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "slidemil/image.hpp"
#include "slidemil/rng.hpp"
#include "slidemil/tiles.hpp"

namespace slidemil {

inline constexpr std::size_t kEmbedDim = 1024;

// Tile -> embedding interface. The production pipeline stores whatever this
// produces; external extractors plug in either here or by importing
// embedding store files written in the documented container format.
class FeatureExtractor {
public:
    virtual ~FeatureExtractor() = default;
    virtual std::size_t dim() const = 0;
    virtual std::vector<double> extract(const Image& tile) const = 0;
};

// Deterministic handcrafted descriptor: per-channel histograms, gradient
// orientation statistics, and 8x8 block means, projected to 1024 dims by a
// fixed seeded random projection. No learned weights; the same tile always
// maps to the same vector.
class BaselineExtractor final : public FeatureExtractor {
public:
    BaselineExtractor() : projection_(make_projection()) {}

    std::size_t dim() const override { return kEmbedDim; }

    std::vector<double> extract(const Image& tile) const override {
        if (tile.width != kTileSize || tile.height != kTileSize)
            throw ShapeError("extractor expects a padded 512x512 tile");
        const std::vector<double> desc = descriptor(tile);
        std::vector<double> out(kEmbedDim, 0.0);
        for (std::size_t i = 0; i < kEmbedDim; ++i) {
            double acc = 0.0;
            const double* row = &projection_[i * kDescDim];
            for (std::size_t j = 0; j < kDescDim; ++j) acc += row[j] * desc[j];
            out[i] = acc;
        }
        return out;
    }

    static constexpr std::size_t kHistBins = 32;
    static constexpr std::size_t kOrientBins = 16;
    static constexpr std::size_t kBlocks = 8;
    static constexpr std::size_t kDescDim =
        3 * kHistBins + kOrientBins + 3 * kBlocks * kBlocks;  // 304

    static std::vector<double> descriptor(const Image& tile) {
        std::vector<double> desc(kDescDim, 0.0);
        const double inv_n = 1.0 / static_cast<double>(tile.width * tile.height);

        // per-channel histograms
        for (std::size_t i = 0; i < tile.width * tile.height; ++i)
            for (int ch = 0; ch < 3; ++ch)
                desc[static_cast<std::size_t>(ch) * kHistBins + tile.data[3 * i + ch] / 8] +=
                    inv_n;

        // gradient orientation histogram on luma, magnitude weighted
        const std::size_t orient_off = 3 * kHistBins;
        for (std::size_t y = 1; y + 1 < tile.height; y += 2) {
            for (std::size_t x = 1; x + 1 < tile.width; x += 2) {
                const double gx = static_cast<double>(luma(tile.get(x + 1, y))) -
                                  static_cast<double>(luma(tile.get(x - 1, y)));
                const double gy = static_cast<double>(luma(tile.get(x, y + 1))) -
                                  static_cast<double>(luma(tile.get(x, y - 1)));
                const double mag = std::sqrt(gx * gx + gy * gy);
                if (mag == 0.0) continue;
                const double angle = std::atan2(gy, gx);  // [-pi, pi]
                std::size_t bin = static_cast<std::size_t>(
                    (angle + std::numbers::pi) / (2 * std::numbers::pi) * kOrientBins);
                if (bin >= kOrientBins) bin = kOrientBins - 1;
                desc[orient_off + bin] += mag * inv_n;
            }
        }

        // block means
        const std::size_t block_off = orient_off + kOrientBins;
        const std::size_t bw = tile.width / kBlocks, bh = tile.height / kBlocks;
        for (std::size_t by = 0; by < kBlocks; ++by)
            for (std::size_t bx = 0; bx < kBlocks; ++bx) {
                double sum[3] = {0, 0, 0};
                for (std::size_t y = by * bh; y < (by + 1) * bh; ++y)
                    for (std::size_t x = bx * bw; x < (bx + 1) * bw; ++x) {
                        const Rgb c = tile.get(x, y);
                        sum[0] += c.r;
                        sum[1] += c.g;
                        sum[2] += c.b;
                    }
                const double inv_b = 1.0 / (255.0 * static_cast<double>(bw * bh));
                for (int ch = 0; ch < 3; ++ch)
                    desc[block_off + 3 * (by * kBlocks + bx) + static_cast<std::size_t>(ch)] =
                        sum[ch] * inv_b;
            }
        return desc;
    }

private:
    static std::vector<double> make_projection() {
        std::vector<double> proj(kEmbedDim * kDescDim);
        Rng rng(0x70726f6au);  // fixed projection seed, part of the format
        const double scale = 1.0 / std::sqrt(static_cast<double>(kDescDim));
        for (double& v : proj) v = rng.gaussian() * scale;
        return proj;
    }

    std::vector<double> projection_;
};

}  // namespace slidemil
