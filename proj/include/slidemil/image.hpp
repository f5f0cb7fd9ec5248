#pragma once

#include <cstdint>
#include <vector>

#include "slidemil/common.hpp"

namespace slidemil {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Packed 8-bit RGB image, row-major.
struct Image {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> data;  // width*height*3

    Image() = default;
    Image(std::size_t w, std::size_t h, Rgb fill = {255, 255, 255})
        : width(w), height(h), data(w * h * 3) {
        for (std::size_t i = 0; i < w * h; ++i) {
            data[3 * i] = fill.r;
            data[3 * i + 1] = fill.g;
            data[3 * i + 2] = fill.b;
        }
    }

    Rgb get(std::size_t x, std::size_t y) const {
        const std::size_t o = 3 * (y * width + x);
        return {data[o], data[o + 1], data[o + 2]};
    }
    void set(std::size_t x, std::size_t y, Rgb c) {
        const std::size_t o = 3 * (y * width + x);
        data[o] = c.r;
        data[o + 1] = c.g;
        data[o + 2] = c.b;
    }

    bool in_bounds(std::size_t x, std::size_t y) const { return x < width && y < height; }

    friend bool operator==(const Image& a, const Image& b) {
        return a.width == b.width && a.height == b.height && a.data == b.data;
    }
};

// Integer luma (77 R + 150 G + 29 B) >> 8; pure integer math so masks are
// bit-identical across platforms.
inline std::uint8_t luma(Rgb c) {
    return static_cast<std::uint8_t>((77u * c.r + 150u * c.g + 29u * c.b) >> 8);
}

inline Image rotate90(const Image& img) {
    Image out(img.height, img.width);
    for (std::size_t y = 0; y < img.height; ++y)
        for (std::size_t x = 0; x < img.width; ++x)
            out.set(y, img.width - 1 - x, img.get(x, y));
    return out;
}

inline Image flip_horizontal(const Image& img) {
    Image out(img.width, img.height);
    for (std::size_t y = 0; y < img.height; ++y)
        for (std::size_t x = 0; x < img.width; ++x)
            out.set(img.width - 1 - x, y, img.get(x, y));
    return out;
}

inline Image flip_vertical(const Image& img) {
    Image out(img.width, img.height);
    for (std::size_t y = 0; y < img.height; ++y)
        for (std::size_t x = 0; x < img.width; ++x)
            out.set(x, img.height - 1 - y, img.get(x, y));
    return out;
}

inline Image crop(const Image& img, std::size_t x0, std::size_t y0, std::size_t w,
                  std::size_t h) {
    if (x0 + w > img.width || y0 + h > img.height) throw ShapeError("crop out of bounds");
    Image out(w, h);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) out.set(x, y, img.get(x0 + x, y0 + y));
    return out;
}

}  // namespace slidemil
