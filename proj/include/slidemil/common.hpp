#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace slidemil {

// Error taxonomy. The CLI maps these onto exit codes (see tools/).
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct EmptyBagError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct StateError : std::logic_error {
    using std::logic_error::logic_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Magnification tags of the slide pyramid. Base scans are 20x; each step
// down halves linear resolution. `thumb` is the masking level.
enum class MagTag : std::uint8_t { x20 = 0, x10 = 1, x5 = 2, thumb = 3 };

inline const char* to_string(MagTag m) {
    switch (m) {
        case MagTag::x20: return "20x";
        case MagTag::x10: return "10x";
        case MagTag::x5: return "5x";
        case MagTag::thumb: return "thumb";
    }
    return "?";
}

inline MagTag mag_from_string(const std::string& s) {
    if (s == "20x") return MagTag::x20;
    if (s == "10x") return MagTag::x10;
    if (s == "5x") return MagTag::x5;
    if (s == "thumb") return MagTag::thumb;
    throw ConfigError("unknown magnification tag: " + s);
}

// Downsample factor of a magnification relative to a 20x base scan.
inline std::uint32_t mag_downsample(MagTag m) {
    switch (m) {
        case MagTag::x20: return 1;
        case MagTag::x10: return 2;
        case MagTag::x5: return 4;
        default: throw ConfigError("thumb has no fixed downsample factor");
    }
}

// Grid position of one tile within a pyramid level.
struct TileCoord {
    MagTag level = MagTag::x5;
    std::uint32_t col = 0;
    std::uint32_t row = 0;

    friend bool operator==(const TileCoord&, const TileCoord&) = default;
    friend auto operator<=>(const TileCoord& a, const TileCoord& b) {
        if (auto c = a.level <=> b.level; c != 0) return c;
        if (auto c = a.row <=> b.row; c != 0) return c;
        return a.col <=> b.col;
    }
};

}  // namespace slidemil
