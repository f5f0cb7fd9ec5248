#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <iterator>

#include "slidemil/rng.hpp"
#include "slidemil/store.hpp"

using namespace slidemil;

namespace {

EmbeddingRecord random_record(const std::string& id, std::size_t tiles, std::size_t dim,
                              std::uint64_t seed) {
    Rng rng(seed);
    EmbeddingRecord rec;
    rec.slide_id = id;
    rec.label = static_cast<int>(rng.below(2));
    rec.embeddings = Tensor2D(tiles, dim);
    for (double& v : rec.embeddings.values) v = rng.gaussian();
    for (std::size_t i = 0; i < tiles; ++i) {
        rec.coords.push_back({MagTag::x10, static_cast<std::uint32_t>(rng.below(16)),
                              static_cast<std::uint32_t>(rng.below(16))});
        rec.aug_flags.push_back(static_cast<std::uint8_t>(i % 3));
    }
    return rec;
}

std::string slurp(const std::string& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("store round-trip is bit exact") {
    std::vector<EmbeddingRecord> records{random_record("s1", 7, 1024, 1),
                                         random_record("s2", 3, 1024, 2)};
    store_write(records, "store_rt.emb");
    auto back = store_read("store_rt.emb");
    REQUIRE(back.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(back[i].slide_id == records[i].slide_id);
        CHECK(back[i].label == records[i].label);
        CHECK(back[i].embeddings == records[i].embeddings);
        CHECK(back[i].coords == records[i].coords);
        CHECK(back[i].aug_flags == records[i].aug_flags);
    }

    // writing the reread records reproduces the file byte for byte
    store_write(back, "store_rt2.emb");
    CHECK(slurp("store_rt.emb") == slurp("store_rt2.emb"));
    std::remove("store_rt.emb");
    std::remove("store_rt2.emb");
}

TEST_CASE("empty records are rejected") {
    EmbeddingRecord rec;
    rec.slide_id = "empty";
    CHECK_THROWS_AS(store_write({rec}, "store_bad.emb"), FormatError);
}

TEST_CASE("mismatched coordinate lengths are rejected") {
    auto rec = random_record("s", 4, 8, 3);
    rec.coords.pop_back();
    CHECK_THROWS_AS(store_write({rec}, "store_bad.emb"), FormatError);
}

TEST_CASE("truncated stores fail to parse") {
    store_write({random_record("s", 4, 16, 4)}, "store_trunc.emb");
    std::string bytes = slurp("store_trunc.emb");
    {
        std::ofstream f("store_trunc.emb", std::ios::binary);
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    }
    CHECK_THROWS_AS(store_read("store_trunc.emb"), FormatError);
    std::remove("store_trunc.emb");
}

TEST_CASE("foreign files are rejected") {
    {
        std::ofstream f("store_foreign.emb", std::ios::binary);
        f << "PK\x03\x04 some zip";
    }
    CHECK_THROWS_AS(store_read("store_foreign.emb"), FormatError);
    std::remove("store_foreign.emb");
}

TEST_CASE("store compresses hugely versus raw tile pixels") {
    // one 1024-wide embedding row stands in for a 512x512 RGB tile
    auto rec = random_record("s", 24, 1024, 5);
    store_write({rec}, "store_ratio.emb");
    const auto bytes = slurp("store_ratio.emb").size();
    const double per_row = static_cast<double>(bytes) / 24.0;
    const double raw_tile = 512.0 * 512.0 * 3.0;
    CHECK(raw_tile / per_row >= 90.0);
    std::remove("store_ratio.emb");
}
