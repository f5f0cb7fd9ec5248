#pragma once

#include <string>
#include <vector>

#include "slidemil/binio.hpp"
#include "slidemil/common.hpp"
#include "slidemil/tensor.hpp"

namespace slidemil {

// Per-slide embedding record: one row per stored tile view. Augmented views
// carry the coordinates of their source tile and a nonzero flag.
struct EmbeddingRecord {
    std::string slide_id;
    int label = 0;
    Tensor2D embeddings;                 // t x dim
    std::vector<TileCoord> coords;       // length t
    std::vector<std::uint8_t> aug_flags; // length t; 0 = original, 1/2 = augmentation index

    std::size_t tiles() const { return embeddings.rows; }
};

inline void validate_record(const EmbeddingRecord& rec) {
    if (rec.tiles() == 0) throw FormatError("embedding record has no tiles");
    if (rec.coords.size() != rec.tiles())
        throw FormatError("coords length does not match embedding rows");
    if (rec.aug_flags.size() != rec.tiles())
        throw FormatError("aug flags length does not match embedding rows");
    if (rec.embeddings.cols == 0) throw FormatError("embedding width must be >= 1");
}

// ---- Embedding store container ---------------------------------------------
// Little-endian chunked binary layout:
//   magic "SMES", u8 version
//   u32 record count
//   per record:
//     str slide_id (u16 length + bytes), u8 label,
//     u32 tile count t, u32 embedding dim,
//     t * (u8 level tag, u32 col, u32 row), t * u8 aug flag,
//     t * dim * f64 embedding values
// read(write(x)) is the identity, bit for bit.

inline constexpr char kStoreMagic[4] = {'S', 'M', 'E', 'S'};
inline constexpr std::uint8_t kStoreVersion = 1;

inline void store_write(const std::vector<EmbeddingRecord>& records, const std::string& path) {
    for (const auto& rec : records) validate_record(rec);
    BinWriter w(path);
    w.bytes(kStoreMagic, 4);
    w.u8(kStoreVersion);
    w.u32(static_cast<std::uint32_t>(records.size()));
    for (const auto& rec : records) {
        w.str(rec.slide_id);
        w.u8(static_cast<std::uint8_t>(rec.label));
        w.u32(static_cast<std::uint32_t>(rec.tiles()));
        w.u32(static_cast<std::uint32_t>(rec.embeddings.cols));
        for (const TileCoord& c : rec.coords) {
            w.u8(static_cast<std::uint8_t>(c.level));
            w.u32(c.col);
            w.u32(c.row);
        }
        for (std::uint8_t f : rec.aug_flags) w.u8(f);
        for (double v : rec.embeddings.values) w.f64(v);
    }
    w.finish();
}

inline std::vector<EmbeddingRecord> store_read(const std::string& path) {
    BinReader r(path);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kStoreMagic, 4) != 0)
        throw FormatError("not an embedding store: " + path);
    const std::uint8_t version = r.u8();
    if (version != kStoreVersion)
        throw FormatError("unsupported store version " + std::to_string(version));
    const std::uint32_t count = r.u32();
    std::vector<EmbeddingRecord> records;
    records.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        EmbeddingRecord rec;
        rec.slide_id = r.str();
        rec.label = r.u8();
        const std::uint32_t t = r.u32();
        const std::uint32_t dim = r.u32();
        rec.coords.resize(t);
        for (TileCoord& c : rec.coords) {
            c.level = static_cast<MagTag>(r.u8());
            c.col = r.u32();
            c.row = r.u32();
        }
        rec.aug_flags.resize(t);
        for (std::uint8_t& f : rec.aug_flags) f = r.u8();
        rec.embeddings = Tensor2D(t, dim);
        for (double& v : rec.embeddings.values) v = r.f64();
        validate_record(rec);
        records.push_back(std::move(rec));
    }
    if (!r.at_eof()) throw FormatError("trailing bytes in store: " + path);
    return records;
}

}  // namespace slidemil
