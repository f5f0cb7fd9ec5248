#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "slidemil/rng.hpp"
#include "slidemil/slide.hpp"

namespace slidemil {

// Synthetic slide corpus for pipeline verification: white background,
// elliptical tissue blobs, one saturated-color artifact blob per slide, and
// a rectangular lesion region on positive slides. Everything is drawn in
// unit slide space and rendered at every pyramid level, so the levels are
// geometrically consistent.
struct SynthPyramidConfig {
    std::size_t num_slides = 20;
    std::size_t base_size = 4096;  // base level, square
    std::uint64_t seed = 1;
    double positive_fraction = 0.5;
};

namespace synthdetail {

struct Ellipse {
    double cx, cy, rx, ry;
    Rgb color;
    bool contains(double x, double y) const {
        const double dx = (x - cx) / rx, dy = (y - cy) / ry;
        return dx * dx + dy * dy <= 1.0;
    }
};

struct Scene {
    std::vector<Ellipse> tissue;
    Ellipse artifact;
    bool has_lesion = false;
    // lesion covers [0.5, 0.75] in both axes: exactly the 20x tiles
    // (4..5, 4..5) of a 4096 base, and the single 10x tile (2, 2).
    static constexpr double kLesionLo = 0.5, kLesionHi = 0.75;
    Rgb lesion_color{130, 60, 150};

    bool in_lesion(double x, double y) const {
        return has_lesion && x >= kLesionLo && x < kLesionHi && y >= kLesionLo && y < kLesionHi;
    }
};

// Share of unit slide space covered by tissue (lesion included), measured
// on a coarse raster.
inline double tissue_coverage(const Scene& s) {
    const std::size_t n = 128;
    std::size_t covered = 0;
    for (std::size_t y = 0; y < n; ++y)
        for (std::size_t x = 0; x < n; ++x) {
            const double ux = (x + 0.5) / n, uy = (y + 0.5) / n;
            bool hit = s.in_lesion(ux, uy);
            for (const Ellipse& e : s.tissue)
                if (!hit && e.contains(ux, uy)) hit = true;
            if (hit) ++covered;
        }
    return static_cast<double>(covered) / static_cast<double>(n * n);
}

inline Scene make_scene(bool positive, Rng& rng) {
    Scene s;
    auto add_blob = [&] {
        Ellipse e;
        // clear of the artifact zone in the top-right corner
        e.cx = rng.uniform(0.12, 0.55);
        e.cy = rng.uniform(0.12, 0.86);
        e.rx = rng.uniform(0.08, 0.15);
        e.ry = rng.uniform(0.08, 0.15);
        e.color = {static_cast<std::uint8_t>(140 + rng.below(25)),
                   static_cast<std::uint8_t>(75 + rng.below(25)),
                   static_cast<std::uint8_t>(150 + rng.below(25))};
        s.tissue.push_back(e);
    };
    for (int i = 0; i < 5; ++i) add_blob();
    if (positive) {
        s.has_lesion = true;
        // anchor tissue around the lesion so its tiles pass the tissue gate
        Ellipse anchor;
        anchor.cx = 0.625;
        anchor.cy = 0.625;
        anchor.rx = 0.16;
        anchor.ry = 0.16;
        anchor.color = {150, 90, 160};
        s.tissue.push_back(anchor);
    }
    // enough tissue that even a coarse whole-slide tile passes the
    // tissue-fraction gate
    while (tissue_coverage(s) < 0.32 && s.tissue.size() < 40) add_blob();
    s.artifact = {0.875, 0.125, 0.05 + rng.uniform(0.0, 0.03), 0.05 + rng.uniform(0.0, 0.03),
                  Rgb{0, 160, 70}};
    return s;
}

inline Image render(const Scene& s, std::size_t w, std::size_t h) {
    const Rgb background{248, 247, 249};
    Image img(w, h, background);
    auto fill = [&](const Ellipse& e, Rgb color) {
        const std::size_t x0 = static_cast<std::size_t>(std::max(0.0, (e.cx - e.rx) * w));
        const std::size_t x1 = std::min(w, static_cast<std::size_t>((e.cx + e.rx) * w) + 1);
        const std::size_t y0 = static_cast<std::size_t>(std::max(0.0, (e.cy - e.ry) * h));
        const std::size_t y1 = std::min(h, static_cast<std::size_t>((e.cy + e.ry) * h) + 1);
        for (std::size_t y = y0; y < y1; ++y)
            for (std::size_t x = x0; x < x1; ++x) {
                const double ux = (static_cast<double>(x) + 0.5) / static_cast<double>(w);
                const double uy = (static_cast<double>(y) + 0.5) / static_cast<double>(h);
                if (e.contains(ux, uy)) img.set(x, y, color);
            }
    };
    for (const Ellipse& e : s.tissue) fill(e, e.color);
    if (s.has_lesion) {
        const std::size_t x0 = static_cast<std::size_t>(Scene::kLesionLo * w);
        const std::size_t x1 = static_cast<std::size_t>(Scene::kLesionHi * w);
        const std::size_t y0 = static_cast<std::size_t>(Scene::kLesionLo * h);
        const std::size_t y1 = static_cast<std::size_t>(Scene::kLesionHi * h);
        for (std::size_t y = y0; y < y1; ++y)
            for (std::size_t x = x0; x < x1; ++x) img.set(x, y, s.lesion_color);
    }
    fill(s.artifact, s.artifact.color);
    return img;
}

}  // namespace synthdetail

// Writes the corpus (one directory per slide plus slides.csv) and returns
// the manifest rows.
inline std::vector<SlideManifestRow> generate_pyramid_corpus(const SynthPyramidConfig& cfg,
                                                             const std::string& out_dir) {
    namespace fs = std::filesystem;
    if (cfg.base_size < 256) throw ConfigError("base_size must be >= 256");
    fs::create_directories(out_dir);

    std::vector<SlideManifestRow> manifest;
    for (std::size_t s = 0; s < cfg.num_slides; ++s) {
        const bool positive =
            s < static_cast<std::size_t>(cfg.positive_fraction * cfg.num_slides + 0.5);
        const std::string slide_id =
            "slide" + std::string(s < 10 ? "0" : "") + std::to_string(s);
        Rng rng(mix_seed(cfg.seed, slide_id));
        synthdetail::Scene scene = synthdetail::make_scene(positive, rng);

        const fs::path slide_dir = fs::path(out_dir) / slide_id;
        fs::create_directories(slide_dir);

        std::vector<std::pair<std::size_t, std::size_t>> dims;
        for (std::size_t sz = cfg.base_size; sz >= 64; sz /= 2) dims.emplace_back(sz, sz);

        std::ofstream meta(slide_dir / "meta.txt");
        meta << "slide_id=" << slide_id << "\nlabel=" << (positive ? 1 : 0)
             << "\nmpp=0.5\nbase_mag=20x\nlevels=" << dims.size() << "\n";
        for (std::size_t i = 0; i < dims.size(); ++i)
            meta << "level" << i << "=" << dims[i].first << "x" << dims[i].second << "\n";
        meta.close();

        for (std::size_t i = 0; i < dims.size(); ++i) {
            Image level = synthdetail::render(scene, dims[i].first, dims[i].second);
            write_png(level, (slide_dir / ("level" + std::to_string(i) + ".png")).string());
        }
        manifest.push_back({slide_id, positive ? 1 : 0, slide_dir.string(), 0.5});
    }
    write_slide_manifest(manifest, (fs::path(out_dir) / "slides.csv").string());
    return manifest;
}

// Unit-space rectangle of the planted lesion, for overlap checks.
inline constexpr double kLesionLo = synthdetail::Scene::kLesionLo;
inline constexpr double kLesionHi = synthdetail::Scene::kLesionHi;

}  // namespace slidemil
