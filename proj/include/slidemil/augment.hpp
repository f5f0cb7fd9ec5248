#pragma once

#include <array>
#include <cmath>

#include "slidemil/image.hpp"
#include "slidemil/rng.hpp"

namespace slidemil {

struct AugmentParams {
    double hed_alpha = 0.05;   // per-channel stain scale range: 1 +/- alpha
    double noise_sigma = 5.0;  // additive gaussian noise, 8-bit units
    bool rotations = true;     // rotation from {0, 90, 180, 270}
    bool flips = true;         // independent horizontal / vertical flips
};

namespace detail {

// Ruifrok-Johnston H&E-DAB stain vectors (rows normalized) and the inverse,
// the standard constants for HED color deconvolution.
inline constexpr double kHedFromRgb[3][3] = {
    {0.65, 0.70, 0.29},
    {0.07, 0.99, 0.11},
    {0.27, 0.57, 0.78},
};

inline std::array<std::array<double, 3>, 3> invert3(const double m[3][3]) {
    std::array<std::array<double, 3>, 3> inv{};
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
    inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
    inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
    inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
    inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
    inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
    inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
    inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
    inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
    return inv;
}

inline const std::array<std::array<double, 3>, 3>& rgb_from_hed() {
    static const auto inv = invert3(kHedFromRgb);
    return inv;
}

inline std::uint8_t clamp_byte(double v) {
    return static_cast<std::uint8_t>(v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : std::llround(v)));
}

// Scale each HED stain channel by the given factors, via optical density.
inline Image hed_perturb(const Image& img, const std::array<double, 3>& scale) {
    const auto& inv = rgb_from_hed();
    Image out(img.width, img.height);
    for (std::size_t i = 0; i < img.width * img.height; ++i) {
        double od[3];
        for (int ch = 0; ch < 3; ++ch) {
            const double intensity = std::max<double>(img.data[3 * i + ch], 1.0);
            od[ch] = -std::log10(intensity / 255.0);
        }
        // row-vector convention: hed = od * M^-1, od' = hed * M
        double hed[3];
        for (int s = 0; s < 3; ++s) {
            hed[s] = (od[0] * inv[0][s] + od[1] * inv[1][s] + od[2] * inv[2][s]) * scale[s];
        }
        for (int ch = 0; ch < 3; ++ch) {
            const double od_new = hed[0] * kHedFromRgb[0][ch] + hed[1] * kHedFromRgb[1][ch] +
                                  hed[2] * kHedFromRgb[2][ch];
            out.data[3 * i + ch] = clamp_byte(255.0 * std::pow(10.0, -od_new));
        }
    }
    return out;
}

}  // namespace detail

// One augmented view: HED stain perturbation, gaussian noise, right-angle
// rotation, independent flips, in that order. Every draw comes from `rng`,
// so a fixed seed reproduces the image bit for bit. With zero magnitudes
// and rotations/flips disabled this is the identity.
inline Image augment_one(const Image& tile, const AugmentParams& p, Rng& rng) {
    Image img = tile;
    if (p.hed_alpha > 0.0) {
        std::array<double, 3> scale;
        for (double& s : scale) s = 1.0 + rng.uniform(-p.hed_alpha, p.hed_alpha);
        img = detail::hed_perturb(img, scale);
    }
    if (p.noise_sigma > 0.0) {
        for (std::uint8_t& v : img.data)
            v = detail::clamp_byte(static_cast<double>(v) + p.noise_sigma * rng.gaussian());
    }
    if (p.rotations) {
        const std::uint64_t quarter_turns = rng.below(4);
        for (std::uint64_t q = 0; q < quarter_turns; ++q) img = rotate90(img);
    }
    if (p.flips) {
        if (rng.coin()) img = flip_horizontal(img);
        if (rng.coin()) img = flip_vertical(img);
    }
    return img;
}

// The two augmented views stored alongside each original tile.
inline std::array<Image, 2> augment(const Image& tile, const AugmentParams& p,
                                    std::uint64_t seed) {
    Rng rng(seed);
    return {augment_one(tile, p, rng), augment_one(tile, p, rng)};
}

}  // namespace slidemil
