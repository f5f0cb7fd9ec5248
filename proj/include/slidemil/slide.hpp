#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "slidemil/common.hpp"
#include "slidemil/image.hpp"
#include "slidemil/png_io.hpp"

namespace slidemil {

// Slide-level metadata; level_dims run from the base scan down to the
// smallest stored level, halving at each step.
struct SlideMeta {
    std::string slide_id;
    int label = 0;
    double mpp = 0.5;                                       // at base level
    MagTag base_mag = MagTag::x20;
    std::vector<std::pair<std::size_t, std::size_t>> level_dims;
};

inline void validate_pyramid(const SlideMeta& meta) {
    if (meta.level_dims.empty()) throw FormatError("pyramid has no levels");
    for (std::size_t i = 1; i < meta.level_dims.size(); ++i) {
        auto [pw, ph] = meta.level_dims[i - 1];
        auto [w, h] = meta.level_dims[i];
        if (w >= pw || h >= ph) throw FormatError("pyramid level dims must strictly decrease");
        // factor-2 pyramid, allowing rounding of odd dims
        if (w != pw / 2 && w != (pw + 1) / 2) throw FormatError("pyramid is not factor 2");
        if (h != ph / 2 && h != (ph + 1) / 2) throw FormatError("pyramid is not factor 2");
    }
}

// Directory-backed slide pyramid: meta.txt plus one PNG per level. This is
// the slide-source boundary; adapters for real WSI containers would
// implement the same surface.
class SlideSource {
public:
    explicit SlideSource(const std::string& dir) : dir_(dir) {
        std::ifstream in(dir_ / "meta.txt");
        if (!in) throw IoError("cannot read slide meta: " + (dir_ / "meta.txt").string());
        std::map<std::string, std::string> kv;
        std::string line;
        while (std::getline(in, line)) {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            kv[line.substr(0, eq)] = line.substr(eq + 1);
        }
        meta_.slide_id = kv.at("slide_id");
        meta_.label = std::stoi(kv.at("label"));
        meta_.mpp = std::stod(kv.at("mpp"));
        meta_.base_mag = mag_from_string(kv.at("base_mag"));
        const std::size_t levels = static_cast<std::size_t>(std::stoul(kv.at("levels")));
        for (std::size_t i = 0; i < levels; ++i) {
            const std::string& dims = kv.at("level" + std::to_string(i));
            const auto x = dims.find('x');
            if (x == std::string::npos) throw FormatError("bad level dims: " + dims);
            meta_.level_dims.emplace_back(std::stoul(dims.substr(0, x)),
                                          std::stoul(dims.substr(x + 1)));
        }
        validate_pyramid(meta_);
    }

    const SlideMeta& meta() const { return meta_; }

    Image read_level(std::size_t index) const {
        if (index >= meta_.level_dims.size()) throw ConfigError("level index out of range");
        Image img = read_png((dir_ / ("level" + std::to_string(index) + ".png")).string());
        if (img.width != meta_.level_dims[index].first ||
            img.height != meta_.level_dims[index].second)
            throw FormatError("level image dims disagree with meta");
        return img;
    }

    // Level index for a magnification tag, via the factor-2 hierarchy from
    // the base scan.
    std::size_t level_for_mag(MagTag mag) const {
        const std::uint32_t base_ds = mag_downsample(meta_.base_mag);
        const std::uint32_t want_ds = mag_downsample(mag);
        if (want_ds < base_ds) throw ConfigError("magnification above the base scan");
        std::uint32_t ratio = want_ds / base_ds;
        std::size_t index = 0;
        while (ratio > 1) {
            ratio /= 2;
            ++index;
        }
        if (index >= meta_.level_dims.size())
            throw ConfigError("pyramid has no level for magnification");
        return index;
    }

    // Masking level: the smallest stored level at least 64 px on the short side.
    std::size_t thumb_level() const {
        std::size_t best = 0;
        for (std::size_t i = 0; i < meta_.level_dims.size(); ++i) {
            auto [w, h] = meta_.level_dims[i];
            if (std::min(w, h) >= 64) best = i;
        }
        return best;
    }

    std::pair<std::size_t, std::size_t> level_dims(std::size_t index) const {
        return meta_.level_dims.at(index);
    }

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    SlideMeta meta_;
};

// ---- Slide manifest ---------------------------------------------------------
// CSV columns: slide_id,label,path,mpp

struct SlideManifestRow {
    std::string slide_id;
    int label = 0;
    std::string path;
    double mpp = 0.5;
};

inline void write_slide_manifest(const std::vector<SlideManifestRow>& rows,
                                 const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write slide manifest: " + path);
    out << "slide_id,label,path,mpp\n";
    for (const auto& r : rows)
        out << r.slide_id << ',' << r.label << ',' << r.path << ',' << r.mpp << '\n';
}

inline std::vector<SlideManifestRow> read_slide_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read slide manifest: " + path);
    std::vector<SlideManifestRow> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("slide_id,", 0) == 0) continue;
        }
        std::istringstream ss(line);
        SlideManifestRow r;
        std::string label, mpp;
        if (!std::getline(ss, r.slide_id, ',') || !std::getline(ss, label, ',') ||
            !std::getline(ss, r.path, ',') || !std::getline(ss, mpp))
            throw FormatError("bad slide manifest row: " + line);
        r.label = std::stoi(label);
        r.mpp = std::stod(mpp);
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace slidemil
