#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "slidemil/image.hpp"

namespace slidemil {

// Binary tissue mask at thumbnail resolution.
struct TissueMask {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> bits;  // 1 = tissue

    TissueMask() = default;
    TissueMask(std::size_t w, std::size_t h) : width(w), height(h), bits(w * h, 0) {}

    bool get(std::size_t x, std::size_t y) const { return bits[y * width + x] != 0; }
    void set(std::size_t x, std::size_t y, bool v) {
        bits[y * width + x] = v ? 1 : 0;
    }
    std::size_t count() const {
        std::size_t n = 0;
        for (auto b : bits) n += b;
        return n;
    }
};

using Histogram256 = std::array<std::uint64_t, 256>;

inline Histogram256 luma_histogram(const Image& img) {
    Histogram256 h{};
    for (std::size_t i = 0; i < img.width * img.height; ++i)
        h[luma({img.data[3 * i], img.data[3 * i + 1], img.data[3 * i + 2]})] += 1;
    return h;
}

// Otsu's threshold: maximize the between-class variance
//   sigma_B^2(t) = (s0 n1 - s1 n0)^2 / (n0 n1)
// where class 0 is bins [0..t]. The comparison is done in exact integer
// arithmetic (128-bit cross multiplication), so ties resolve to the smallest
// threshold deterministically on every platform. Totals up to 2^18 pixels
// stay within range, which covers any masking thumbnail.
inline std::uint8_t otsu_threshold(const Histogram256& hist) {
    std::uint64_t total = 0, total_sum = 0;
    for (int i = 0; i < 256; ++i) {
        total += hist[i];
        total_sum += hist[i] * static_cast<std::uint64_t>(i);
    }
    if (total == 0) throw DataError("otsu: empty histogram");
    if (total > (1ull << 18)) throw DataError("otsu: histogram total too large for exact mode");

    int best_t = 0;
    unsigned __int128 best_num = 0;  // (s0 n1 - s1 n0)^2
    std::uint64_t best_den = 1;      // n0 n1
    std::uint64_t n0 = 0, s0 = 0;
    for (int t = 0; t < 256; ++t) {
        n0 += hist[t];
        s0 += hist[t] * static_cast<std::uint64_t>(t);
        const std::uint64_t n1 = total - n0;
        if (n0 == 0 || n1 == 0) continue;  // variance is zero
        const std::uint64_t s1 = total_sum - s0;
        const std::int64_t diff = static_cast<std::int64_t>(s0 * n1) -
                                  static_cast<std::int64_t>(s1 * n0);
        const unsigned __int128 num =
            static_cast<unsigned __int128>(diff < 0 ? -diff : diff) *
            static_cast<unsigned __int128>(diff < 0 ? -diff : diff);
        const std::uint64_t den = n0 * n1;
        // num/den > best_num/best_den  <=>  num*best_den > best_num*den
        if (num * best_den > best_num * den) {
            best_num = num;
            best_den = den;
            best_t = t;
        }
    }
    return static_cast<std::uint8_t>(best_t);
}

// Tissue = pixels at or below the Otsu threshold (stained tissue is darker
// than the slide background).
inline TissueMask tissue_mask(const Image& thumb, std::uint8_t threshold) {
    TissueMask m(thumb.width, thumb.height);
    for (std::size_t y = 0; y < thumb.height; ++y)
        for (std::size_t x = 0; x < thumb.width; ++x)
            m.set(x, y, luma(thumb.get(x, y)) <= threshold);
    return m;
}

// Morphological closing with a 3x3 square element. The mask is embedded in
// an infinite background plane (one padding ring is enough for a 3x3
// element), which makes the operation extensive and idempotent.
inline TissueMask morph_close(const TissueMask& mask) {
    const long w = static_cast<long>(mask.width), h = static_cast<long>(mask.height);
    const long pw = w + 2, ph = h + 2;
    std::vector<std::uint8_t> dil(static_cast<std::size_t>(pw * ph), 0);
    auto dil_at = [&](long x, long y) -> std::uint8_t& {
        return dil[static_cast<std::size_t>((y + 1) * pw + (x + 1))];
    };
    for (long y = 0; y < h; ++y)
        for (long x = 0; x < w; ++x)
            if (mask.get(static_cast<std::size_t>(x), static_cast<std::size_t>(y)))
                for (long dy = -1; dy <= 1; ++dy)
                    for (long dx = -1; dx <= 1; ++dx) dil_at(x + dx, y + dy) = 1;

    TissueMask out(mask.width, mask.height);
    for (long y = 0; y < h; ++y) {
        for (long x = 0; x < w; ++x) {
            bool all = true;
            for (long dy = -1; dy <= 1 && all; ++dy)
                for (long dx = -1; dx <= 1 && all; ++dx)
                    if (!dil_at(x + dx, y + dy)) all = false;
            out.set(static_cast<std::size_t>(x), static_cast<std::size_t>(y), all);
        }
    }
    return out;
}

// Mean RGB over the masked pixels.
inline std::array<double, 3> mean_color(const Image& img, const TissueMask& mask) {
    if (mask.count() == 0) throw DataError("mean_color: empty mask");
    std::array<double, 3> mean{0, 0, 0};
    std::size_t n = 0;
    for (std::size_t y = 0; y < mask.height; ++y)
        for (std::size_t x = 0; x < mask.width; ++x)
            if (mask.get(x, y)) {
                Rgb c = img.get(x, y);
                mean[0] += c.r;
                mean[1] += c.g;
                mean[2] += c.b;
                ++n;
            }
    for (double& v : mean) v /= static_cast<double>(n);
    return mean;
}

// Drop masked pixels whose color sits further than `max_distance` from the
// mean color of the original mask (artifacts, pen annotations). The mean is
// computed once, before any pixel is removed.
inline TissueMask color_artifact_filter(const Image& img, const TissueMask& mask,
                                        double max_distance) {
    const std::array<double, 3> mean = mean_color(img, mask);
    TissueMask out(mask.width, mask.height);
    for (std::size_t y = 0; y < mask.height; ++y)
        for (std::size_t x = 0; x < mask.width; ++x) {
            if (!mask.get(x, y)) continue;
            Rgb c = img.get(x, y);
            const double dr = c.r - mean[0], dg = c.g - mean[1], db = c.b - mean[2];
            out.set(x, y, std::sqrt(dr * dr + dg * dg + db * db) <= max_distance);
        }
    return out;
}

}  // namespace slidemil
