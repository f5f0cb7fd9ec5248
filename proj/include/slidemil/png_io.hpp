#pragma once

#include <zlib.h>

#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "slidemil/image.hpp"

namespace slidemil {

// Minimal PNG reader/writer backed by zlib. The writer always emits 8-bit
// RGB, non-interlaced, filter 0, fixed compression level, so identical
// images give byte-identical files. The reader handles the 8-bit gray /
// RGB / RGBA color types and all five scanline filters.

namespace pngdetail {

inline void put_u32(std::vector<std::uint8_t>& v, std::uint32_t x) {
    v.push_back(static_cast<std::uint8_t>(x >> 24));
    v.push_back(static_cast<std::uint8_t>(x >> 16));
    v.push_back(static_cast<std::uint8_t>(x >> 8));
    v.push_back(static_cast<std::uint8_t>(x));
}

inline std::uint32_t read_u32(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

inline void append_chunk(std::vector<std::uint8_t>& out, const char type[4],
                         const std::uint8_t* data, std::size_t len) {
    put_u32(out, static_cast<std::uint32_t>(len));
    const std::size_t type_at = out.size();
    out.insert(out.end(), type, type + 4);
    if (len) out.insert(out.end(), data, data + len);
    const auto crc = crc32(0, out.data() + type_at, static_cast<uInt>(4 + len));
    put_u32(out, static_cast<std::uint32_t>(crc));
}

inline std::vector<std::uint8_t> deflate_all(const std::vector<std::uint8_t>& raw) {
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> out(bound);
    if (compress2(out.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw IoError("png: deflate failed");
    out.resize(bound);
    return out;
}

inline std::vector<std::uint8_t> inflate_all(const std::uint8_t* data, std::size_t len,
                                             std::size_t expected) {
    std::vector<std::uint8_t> out(expected);
    uLongf out_len = static_cast<uLongf>(expected);
    if (uncompress(out.data(), &out_len, data, static_cast<uLong>(len)) != Z_OK ||
        out_len != expected)
        throw FormatError("png: inflate failed");
    return out;
}

inline int paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

}  // namespace pngdetail

inline void write_png(const Image& img, const std::string& path) {
    if (img.width == 0 || img.height == 0) throw IoError("png: empty image");
    const std::size_t stride = img.width * 3;
    std::vector<std::uint8_t> raw;
    raw.reserve((stride + 1) * img.height);
    for (std::size_t y = 0; y < img.height; ++y) {
        raw.push_back(0);  // filter type 0
        raw.insert(raw.end(), img.data.begin() + static_cast<std::ptrdiff_t>(y * stride),
                   img.data.begin() + static_cast<std::ptrdiff_t>((y + 1) * stride));
    }
    const std::vector<std::uint8_t> idat = pngdetail::deflate_all(raw);

    std::vector<std::uint8_t> out;
    static const std::uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    out.insert(out.end(), sig, sig + 8);
    std::vector<std::uint8_t> ihdr;
    pngdetail::put_u32(ihdr, static_cast<std::uint32_t>(img.width));
    pngdetail::put_u32(ihdr, static_cast<std::uint32_t>(img.height));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(2);  // color type: truecolor
    ihdr.push_back(0);  // compression
    ihdr.push_back(0);  // filter method
    ihdr.push_back(0);  // no interlace
    pngdetail::append_chunk(out, "IHDR", ihdr.data(), ihdr.size());
    pngdetail::append_chunk(out, "IDAT", idat.data(), idat.size());
    pngdetail::append_chunk(out, "IEND", nullptr, 0);

    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("png write failed: " + path);
}

inline Image read_png(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path);
    std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
    static const std::uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    if (buf.size() < 8 || std::memcmp(buf.data(), sig, 8) != 0)
        throw FormatError("not a png file: " + path);

    std::size_t w = 0, h = 0;
    int bit_depth = 0, color_type = 0;
    std::vector<std::uint8_t> idat;
    std::size_t pos = 8;
    while (pos + 8 <= buf.size()) {
        const std::uint32_t len = pngdetail::read_u32(&buf[pos]);
        if (pos + 12 + len > buf.size()) throw FormatError("png: truncated chunk");
        const char* type = reinterpret_cast<const char*>(&buf[pos + 4]);
        const std::uint8_t* data = &buf[pos + 8];
        if (std::memcmp(type, "IHDR", 4) == 0) {
            w = pngdetail::read_u32(data);
            h = pngdetail::read_u32(data + 4);
            bit_depth = data[8];
            color_type = data[9];
            if (data[12] != 0) throw FormatError("png: interlaced images unsupported");
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), data, data + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            break;
        }
        pos += 12 + len;
    }
    if (w == 0 || h == 0 || idat.empty()) throw FormatError("png: missing image data");
    if (bit_depth != 8) throw FormatError("png: only 8-bit depth supported");
    std::size_t channels;
    switch (color_type) {
        case 0: channels = 1; break;
        case 2: channels = 3; break;
        case 6: channels = 4; break;
        default: throw FormatError("png: unsupported color type");
    }

    const std::size_t stride = w * channels;
    std::vector<std::uint8_t> raw =
        pngdetail::inflate_all(idat.data(), idat.size(), (stride + 1) * h);

    // Undo per-scanline filters in place.
    std::vector<std::uint8_t> pixels(stride * h);
    for (std::size_t y = 0; y < h; ++y) {
        const std::uint8_t filter = raw[y * (stride + 1)];
        const std::uint8_t* src = &raw[y * (stride + 1) + 1];
        std::uint8_t* dst = &pixels[y * stride];
        const std::uint8_t* prev = y ? &pixels[(y - 1) * stride] : nullptr;
        for (std::size_t x = 0; x < stride; ++x) {
            const int a = x >= channels ? dst[x - channels] : 0;
            const int b = prev ? prev[x] : 0;
            const int c = (prev && x >= channels) ? prev[x - channels] : 0;
            int v = src[x];
            switch (filter) {
                case 0: break;
                case 1: v += a; break;
                case 2: v += b; break;
                case 3: v += (a + b) / 2; break;
                case 4: v += pngdetail::paeth(a, b, c); break;
                default: throw FormatError("png: unknown filter type");
            }
            dst[x] = static_cast<std::uint8_t>(v & 0xff);
        }
    }

    Image img(w, h);
    for (std::size_t i = 0; i < w * h; ++i) {
        switch (channels) {
            case 1:
                img.data[3 * i] = img.data[3 * i + 1] = img.data[3 * i + 2] = pixels[i];
                break;
            case 3:
                img.data[3 * i] = pixels[3 * i];
                img.data[3 * i + 1] = pixels[3 * i + 1];
                img.data[3 * i + 2] = pixels[3 * i + 2];
                break;
            case 4:
                img.data[3 * i] = pixels[4 * i];
                img.data[3 * i + 1] = pixels[4 * i + 1];
                img.data[3 * i + 2] = pixels[4 * i + 2];
                break;
        }
    }
    return img;
}

}  // namespace slidemil
