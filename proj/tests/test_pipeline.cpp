#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <iterator>

#include "slidemil/pipeline.hpp"
#include "slidemil/synthpyramid.hpp"

using namespace slidemil;
namespace fs = std::filesystem;

namespace {

struct CorpusFixture {
    fs::path dir;
    std::vector<SlideManifestRow> manifest;

    CorpusFixture() {
        dir = fs::temp_directory_path() / "slidemil_test_corpus";
        if (!fs::exists(dir / "slides.csv")) {
            SynthPyramidConfig cfg;
            cfg.num_slides = 4;
            cfg.base_size = 2048;
            cfg.seed = 77;
            manifest = generate_pyramid_corpus(cfg, dir.string());
        } else {
            manifest = read_slide_manifest((dir / "slides.csv").string());
        }
    }
};

std::string slurp(const std::string& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("synthetic pyramid corpus is a valid factor-2 pyramid") {
    CorpusFixture corpus;
    REQUIRE(corpus.manifest.size() == 4);
    for (const auto& row : corpus.manifest) {
        SlideSource slide(row.path);
        CHECK(slide.meta().slide_id == row.slide_id);
        CHECK(slide.meta().label == row.label);
        CHECK(slide.meta().level_dims.front().first == 2048);
        CHECK(slide.meta().level_dims.back().first == 64);
        CHECK(slide.thumb_level() == slide.meta().level_dims.size() - 1);
        CHECK(slide.level_for_mag(MagTag::x20) == 0);
        CHECK(slide.level_for_mag(MagTag::x10) == 1);
        CHECK(slide.level_for_mag(MagTag::x5) == 2);
    }
}

TEST_CASE("preprocess keeps only tiles that pass the tissue gate") {
    CorpusFixture corpus;
    SlideSource slide(corpus.manifest[0].path);
    PipelineConfig cfg;
    cfg.seed = 5;
    BaselineExtractor ex;
    SlideStats stats;
    EmbeddingRecord rec = preprocess_slide(slide, MagTag::x10, cfg, ex, &stats);
    CHECK(stats.kept >= 1);
    CHECK(rec.tiles() == stats.kept * 3);  // two augmentations per tile

    // recompute the gate for each stored tile from the pyramid itself
    const Image thumb = slide.read_level(slide.thumb_level());
    const std::uint8_t otsu = otsu_threshold(luma_histogram(thumb));
    const std::size_t l10 = slide.level_for_mag(MagTag::x10);
    const Image level = slide.read_level(l10);
    const auto [lw, lh] = slide.level_dims(l10);
    for (std::size_t i = 0; i < rec.tiles(); ++i) {
        if (rec.aug_flags[i] != 0) continue;
        const TileCoord& c = rec.coords[i];
        CHECK(c.level == MagTag::x10);
        TileRef t = make_tile(c.level, c.col, c.row, lw, lh);
        Image tile = pad_tile(crop(level, t.px, t.py, t.pw, t.ph), {248, 247, 249});
        CHECK(tissue_fraction(tile, otsu) >= cfg.tissue_fraction);
    }
}

TEST_CASE("preprocess is byte-deterministic per seed") {
    CorpusFixture corpus;
    PipelineConfig cfg;
    cfg.seed = 9;
    BaselineExtractor ex;
    for (int run = 0; run < 2; ++run) {
        std::vector<EmbeddingRecord> records;
        for (const auto& row : corpus.manifest) {
            SlideSource slide(row.path);
            records.push_back(preprocess_slide(slide, MagTag::x10, cfg, ex, nullptr));
        }
        store_write(records, "pipe_det_" + std::to_string(run) + ".emb");
    }
    CHECK(slurp("pipe_det_0.emb") == slurp("pipe_det_1.emb"));
    std::remove("pipe_det_0.emb");
    std::remove("pipe_det_1.emb");
}

TEST_CASE("artifact cells never reach the store") {
    CorpusFixture corpus;
    PipelineConfig cfg;
    cfg.seed = 11;
    BaselineExtractor ex;
    for (const auto& row : corpus.manifest) {
        SlideSource slide(row.path);
        for (MagTag mag : {MagTag::x5, MagTag::x10, MagTag::x20}) {
            EmbeddingRecord rec = preprocess_slide(slide, mag, cfg, ex, nullptr);
            const auto [lw, lh] = slide.level_dims(slide.level_for_mag(mag));
            for (const TileCoord& c : rec.coords) {
                // artifact zone: top-right corner [0.75, 1] x [0, 0.25]
                const double x0 = static_cast<double>(c.col) * kTileSize / lw;
                const double y1 = static_cast<double>(c.row + 1) * kTileSize / lh;
                const bool inside_artifact_zone = x0 >= 0.75 && y1 <= 0.25;
                CHECK_FALSE(inside_artifact_zone);
            }
        }
    }
}

TEST_CASE("bags built from records carry labels and coordinates") {
    CorpusFixture corpus;
    PipelineConfig cfg;
    cfg.seed = 13;
    BaselineExtractor ex;
    std::vector<ManifestRow> manifest;
    for (const auto& row : corpus.manifest) {
        SlideSource slide(row.path);
        EmbeddingRecord rec = preprocess_slide(slide, MagTag::x10, cfg, ex, nullptr);
        const std::string path = "bagstore_" + row.slide_id + ".emb";
        store_write({rec}, path);
        manifest.push_back({row.slide_id, row.label, path});
    }
    auto bags = load_bags(manifest);
    REQUIRE(bags.size() == corpus.manifest.size());
    for (std::size_t i = 0; i < bags.size(); ++i) {
        CHECK(bags[i].label == corpus.manifest[i].label);
        CHECK(bags[i].instances.cols == 1024);
        REQUIRE(bags[i].tile_coords.has_value());
        CHECK(bags[i].tile_coords->size() == bags[i].size());
        std::remove(manifest[i].store_path.c_str());
    }
}
