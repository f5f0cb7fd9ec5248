#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "slidemil/augment.hpp"
#include "slidemil/bags.hpp"
#include "slidemil/features.hpp"
#include "slidemil/mask.hpp"
#include "slidemil/sampling.hpp"
#include "slidemil/slide.hpp"
#include "slidemil/store.hpp"
#include "slidemil/tiles.hpp"

namespace slidemil {

struct PipelineConfig {
    double color_distance = 60.0;     // artifact filter threshold, 8-bit RGB euclidean
    double tissue_fraction = 0.25;    // per-tile keep threshold
    std::size_t level5_limit = 1000;  // sample 5x tiles only above this count
    double level5_frac = 0.6;
    std::size_t n_clusters = 4;       // k-means k for the 10x/20x chain
    std::size_t n_per_cluster = 20;
    std::size_t kmeans_max_iters = 50;
    bool augment = true;              // two stored augmentations per tile
    AugmentParams aug_params;
    std::uint64_t seed = 1;
};

struct SlideStats {
    std::size_t kept = 0;
    std::size_t discarded = 0;
};

namespace pipedetail {

struct MaskedSlide {
    std::uint8_t otsu = 0;
    TissueMask filtered;   // after closing and the color filter
    Rgb background{255, 255, 255};
    std::size_t thumb_w = 0, thumb_h = 0;
};

inline MaskedSlide mask_slide(const SlideSource& slide, const PipelineConfig& cfg) {
    const Image thumb = slide.read_level(slide.thumb_level());
    MaskedSlide out;
    out.thumb_w = thumb.width;
    out.thumb_h = thumb.height;
    out.otsu = otsu_threshold(luma_histogram(thumb));
    TissueMask raw = tissue_mask(thumb, out.otsu);
    TissueMask closed = morph_close(raw);
    if (closed.count() == 0) throw DataError("no tissue found in slide " + slide.meta().slide_id);
    out.filtered = color_artifact_filter(thumb, closed, cfg.color_distance);
    if (out.filtered.count() == 0)
        throw DataError("color filter removed all tissue in slide " + slide.meta().slide_id);

    // average background color: mean over non-tissue thumbnail pixels
    double sum[3] = {0, 0, 0};
    std::size_t n = 0;
    for (std::size_t y = 0; y < thumb.height; ++y)
        for (std::size_t x = 0; x < thumb.width; ++x)
            if (!closed.get(x, y)) {
                const Rgb c = thumb.get(x, y);
                sum[0] += c.r;
                sum[1] += c.g;
                sum[2] += c.b;
                ++n;
            }
    if (n > 0)
        out.background = {static_cast<std::uint8_t>(sum[0] / n),
                          static_cast<std::uint8_t>(sum[1] / n),
                          static_cast<std::uint8_t>(sum[2] / n)};
    return out;
}

// Tiles at `mag` whose grid cell is seeded by at least one filtered tissue
// pixel. The filtered thumbnail pixel set supports every magnification.
inline std::set<std::pair<std::uint32_t, std::uint32_t>> allowed_cells(
    const MaskedSlide& masked, const SlideSource& slide, MagTag mag) {
    const auto [w, h] = slide.level_dims(slide.level_for_mag(mag));
    std::set<std::pair<std::uint32_t, std::uint32_t>> cells;
    for (const TileRef& t : tiles_from_mask(masked.filtered, mag, w, h))
        cells.insert({t.row, t.col});
    return cells;
}

struct FetchedTile {
    TileRef ref;
    Image image;  // padded to kTileSize
};

// Fetch, pad, and gate one level's candidate tiles against the tissue
// fraction threshold. `level_img` is the decoded level.
inline std::vector<FetchedTile> fetch_and_gate(const std::vector<TileRef>& tiles,
                                               const Image& level_img, const MaskedSlide& masked,
                                               const PipelineConfig& cfg, SlideStats& stats) {
    std::vector<FetchedTile> kept;
    for (const TileRef& t : tiles) {
        Image raw = crop(level_img, t.px, t.py, t.pw, t.ph);
        Image padded = pad_tile(raw, masked.background);
        if (tissue_fraction_gate(padded, masked.otsu, cfg.tissue_fraction)) {
            kept.push_back({t, std::move(padded)});
        } else {
            stats.discarded += 1;
        }
    }
    return kept;
}

inline Tensor2D embed_tiles(const std::vector<FetchedTile>& tiles,
                            const FeatureExtractor& extractor) {
    Tensor2D out(tiles.size(), extractor.dim());
    for (std::size_t i = 0; i < tiles.size(); ++i) {
        const std::vector<double> e = extractor.extract(tiles[i].image);
        std::copy(e.begin(), e.end(), out.values.begin() + static_cast<std::ptrdiff_t>(
                                                               i * extractor.dim()));
    }
    return out;
}

}  // namespace pipedetail

// Runs the preprocessing chain for one slide at the target magnification:
// thumbnail masking, artifact filtering, the 5x gather with its sampling
// rule, then (for 10x/20x) per-magnification k-means cluster sampling and
// descent to the children, gating fetched tiles at every step. Returns the
// embedding record of the surviving tiles plus kept/discarded counts.
inline EmbeddingRecord preprocess_slide(const SlideSource& slide, MagTag target,
                                        const PipelineConfig& cfg,
                                        const FeatureExtractor& extractor, SlideStats* stats_out) {
    if (target == MagTag::thumb) throw ConfigError("cannot build a dataset at thumb level");
    const std::uint64_t slide_seed = mix_seed(cfg.seed, slide.meta().slide_id);
    SlideStats stats;

    pipedetail::MaskedSlide masked = pipedetail::mask_slide(slide, cfg);

    // 5x stage
    const std::size_t l5 = slide.level_for_mag(MagTag::x5);
    const auto [w5, h5] = slide.level_dims(l5);
    std::vector<TileRef> seeds5 = tiles_from_mask(masked.filtered, MagTag::x5, w5, h5);
    const Image level5_img = slide.read_level(l5);
    std::vector<pipedetail::FetchedTile> current =
        pipedetail::fetch_and_gate(seeds5, level5_img, masked, cfg, stats);
    {
        std::vector<TileRef> refs;
        for (const auto& f : current) refs.push_back(f.ref);
        std::vector<TileRef> sampled =
            sample_level5(refs, cfg.level5_frac, cfg.level5_limit, mix_seed(slide_seed, 5));
        if (sampled.size() != refs.size()) {
            std::set<std::pair<std::uint32_t, std::uint32_t>> keep;
            for (const TileRef& t : sampled) keep.insert({t.row, t.col});
            std::vector<pipedetail::FetchedTile> pruned;
            for (auto& f : current)
                if (keep.count({f.ref.row, f.ref.col})) pruned.push_back(std::move(f));
            current = std::move(pruned);
        }
    }
    if (current.empty()) throw DataError("no tiles survived at 5x for " + slide.meta().slide_id);

    // descend 5x -> 10x -> 20x through cluster sampling
    const MagTag chain[] = {MagTag::x5, MagTag::x10, MagTag::x20};
    std::size_t chain_pos = 2;  // index of 5x in chain, descending
    while (chain[chain_pos] != target) {
        const MagTag next = chain[chain_pos - 1];
        const std::size_t ln = slide.level_for_mag(next);
        const auto [wn, hn] = slide.level_dims(ln);

        // cluster the current magnification's tiles on their embeddings
        Tensor2D points = pipedetail::embed_tiles(current, extractor);
        const std::size_t k = std::min(cfg.n_clusters, current.size());
        KmeansResult km = kmeans(points, k, mix_seed(slide_seed, 0x6b6dull + chain_pos),
                                 cfg.kmeans_max_iters);
        std::vector<TileRef> refs;
        for (const auto& f : current) refs.push_back(f.ref);
        std::vector<TileRef> chosen = cluster_sample(refs, km.assignments, k, cfg.n_per_cluster,
                                                     mix_seed(slide_seed, 0x6373ull + chain_pos));

        // children at the next magnification, restricted to tissue-seeded cells
        const auto allowed = pipedetail::allowed_cells(masked, slide, next);
        std::vector<TileRef> child_candidates;
        for (const TileRef& t : chosen)
            for (const TileRef& c : child_tiles(t, next, wn, hn))
                if (allowed.count({c.row, c.col})) child_candidates.push_back(c);
        std::sort(child_candidates.begin(), child_candidates.end(),
                  [](const TileRef& a, const TileRef& b) {
                      return std::pair(a.row, a.col) < std::pair(b.row, b.col);
                  });
        child_candidates.erase(std::unique(child_candidates.begin(), child_candidates.end()),
                               child_candidates.end());

        const Image level_img = slide.read_level(ln);
        current = pipedetail::fetch_and_gate(child_candidates, level_img, masked, cfg, stats);
        if (current.empty())
            throw DataError("no tiles survived at " + std::string(to_string(next)) + " for " +
                            slide.meta().slide_id);
        --chain_pos;
    }

    // embeddings + stored augmentations
    EmbeddingRecord rec;
    rec.slide_id = slide.meta().slide_id;
    rec.label = slide.meta().label;
    const std::size_t views = cfg.augment ? 3 : 1;
    rec.embeddings = Tensor2D(current.size() * views, extractor.dim());
    std::size_t row = 0;
    for (std::size_t i = 0; i < current.size(); ++i) {
        const auto& tile = current[i];
        std::vector<Image> images;
        images.push_back(tile.image);
        if (cfg.augment) {
            auto aug = augment(tile.image, cfg.aug_params,
                               mix_seed(slide_seed, 0x617547ull + tile.ref.row * 4096 +
                                                        tile.ref.col));
            images.push_back(std::move(aug[0]));
            images.push_back(std::move(aug[1]));
        }
        for (std::size_t v = 0; v < images.size(); ++v) {
            const std::vector<double> e = extractor.extract(images[v]);
            std::copy(e.begin(), e.end(),
                      rec.embeddings.values.begin() +
                          static_cast<std::ptrdiff_t>(row * extractor.dim()));
            rec.coords.push_back(tile.ref.coord());
            rec.aug_flags.push_back(static_cast<std::uint8_t>(v));
            ++row;
        }
    }
    stats.kept = current.size();
    if (stats_out) *stats_out = stats;
    validate_record(rec);
    return rec;
}

// Bags from stored records (tile embeddings as instances).
inline Bag bag_from_record(const EmbeddingRecord& rec) {
    Bag bag;
    bag.instances = rec.embeddings;
    bag.label = rec.label;
    bag.source_id = rec.slide_id;
    bag.tile_coords = rec.coords;
    return bag;
}

inline std::vector<Bag> load_bags(const std::vector<ManifestRow>& manifest) {
    std::vector<Bag> bags;
    for (const ManifestRow& row : manifest) {
        auto records = store_read(row.store_path);
        for (const EmbeddingRecord& rec : records)
            if (rec.slide_id == row.source_id) bags.push_back(bag_from_record(rec));
    }
    if (bags.empty()) throw DataError("manifest matched no store records");
    return bags;
}

}  // namespace slidemil
