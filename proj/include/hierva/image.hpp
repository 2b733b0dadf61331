#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hierva {

struct Rgba {
    uint8_t r = 0, g = 0, b = 0, a = 255;
    bool operator==(const Rgba&) const = default;
};

/// Decoded raster, always 8-bit RGBA. `source` carries provenance: a file
/// path for loaded charts, or a crop description for zoom products.
struct RasterImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> rgba;  // width*height*4, row-major
    std::string source;

    RasterImage() = default;
    RasterImage(int w, int h, Rgba fill = {255, 255, 255, 255}) : width(w), height(h) {
        if (w < 1 || h < 1) throw std::invalid_argument("RasterImage: dimensions must be >= 1");
        rgba.resize(static_cast<size_t>(w) * h * 4);
        for (int i = 0; i < w * h; ++i) set_index(i, fill);
    }

    Rgba at(int x, int y) const {
        size_t i = (static_cast<size_t>(y) * width + x) * 4;
        return {rgba[i], rgba[i + 1], rgba[i + 2], rgba[i + 3]};
    }
    void set(int x, int y, Rgba c) {
        set_index(static_cast<size_t>(y) * width + x, c);
    }

    bool same_pixels(const RasterImage& other) const {
        return width == other.width && height == other.height && rgba == other.rgba;
    }

private:
    void set_index(size_t i, Rgba c) {
        rgba[i * 4] = c.r;
        rgba[i * 4 + 1] = c.g;
        rgba[i * 4 + 2] = c.b;
        rgba[i * 4 + 3] = c.a;
    }
};

/// Bounding box in the pixel frame of the image being cropped: (x1, y1)
/// top-left, (x2, y2) bottom-right, right/bottom edges exclusive.
struct BBox {
    double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
    bool operator==(const BBox&) const = default;
};

struct IntBox {
    int x1 = 0, y1 = 0, x2 = 0, y2 = 0;
    int width() const { return x2 - x1; }
    int height() const { return y2 - y1; }
    bool operator==(const IntBox&) const = default;
};

struct DegenerateBBox : std::runtime_error {
    explicit DegenerateBBox(const std::string& what) : std::runtime_error(what) {}
};

/// Rounds the box to integer pixels and intersects it with [0,w]x[0,h].
/// Returns nullopt when the intersection is empty (zero width or height).
inline std::optional<IntBox> clamp_bbox(const BBox& b, int w, int h) {
    auto clampi = [](double v, int lo, int hi) {
        long long r = std::llround(v);
        if (r < lo) r = lo;
        if (r > hi) r = hi;
        return static_cast<int>(r);
    };
    IntBox out{clampi(b.x1, 0, w), clampi(b.y1, 0, h), clampi(b.x2, 0, w), clampi(b.y2, 0, h)};
    if (out.x1 >= out.x2 || out.y1 >= out.y2) return std::nullopt;
    return out;
}

/// Axis-aligned subrectangle copy. Box must already be clamped and valid.
inline RasterImage crop_pixels(const RasterImage& src, const IntBox& box) {
    RasterImage out(box.width(), box.height());
    for (int y = 0; y < box.height(); ++y) {
        const uint8_t* from =
            src.rgba.data() + ((static_cast<size_t>(y + box.y1) * src.width) + box.x1) * 4;
        uint8_t* to = out.rgba.data() + static_cast<size_t>(y) * box.width() * 4;
        std::memcpy(to, from, static_cast<size_t>(box.width()) * 4);
    }
    return out;
}

enum class ResizeFilter { Nearest, Bilinear };

inline RasterImage resize_image(const RasterImage& src, int out_w, int out_h,
                                ResizeFilter filter = ResizeFilter::Nearest) {
    RasterImage out(out_w, out_h);
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            if (filter == ResizeFilter::Nearest) {
                int sx = static_cast<int>((static_cast<int64_t>(x) * src.width) / out_w);
                int sy = static_cast<int>((static_cast<int64_t>(y) * src.height) / out_h);
                out.set(x, y, src.at(sx, sy));
            } else {
                double fx = (x + 0.5) * src.width / out_w - 0.5;
                double fy = (y + 0.5) * src.height / out_h - 0.5;
                int x0 = std::max(0, static_cast<int>(std::floor(fx)));
                int y0 = std::max(0, static_cast<int>(std::floor(fy)));
                int x1 = std::min(src.width - 1, x0 + 1);
                int y1 = std::min(src.height - 1, y0 + 1);
                double tx = std::min(1.0, std::max(0.0, fx - x0));
                double ty = std::min(1.0, std::max(0.0, fy - y0));
                auto mix = [&](auto get) {
                    double top = get(src.at(x0, y0)) * (1 - tx) + get(src.at(x1, y0)) * tx;
                    double bot = get(src.at(x0, y1)) * (1 - tx) + get(src.at(x1, y1)) * tx;
                    return static_cast<uint8_t>(std::lround(top * (1 - ty) + bot * ty));
                };
                out.set(x, y,
                        {mix([](Rgba c) { return double(c.r); }),
                         mix([](Rgba c) { return double(c.g); }),
                         mix([](Rgba c) { return double(c.b); }),
                         mix([](Rgba c) { return double(c.a); })});
            }
        }
    }
    return out;
}

/// Crops `src` to `bbox` (clamped), then upscales so the smaller side equals
/// `min_side` when it falls below it, preserving aspect ratio with
/// nearest-integer output dimensions. min_side == 0 disables resizing.
/// Throws DegenerateBBox when the clamped box is empty.
inline RasterImage crop_and_resize(const RasterImage& src, const BBox& bbox, int min_side,
                                   ResizeFilter filter = ResizeFilter::Nearest,
                                   IntBox* clamped_out = nullptr) {
    auto box = clamp_bbox(bbox, src.width, src.height);
    if (!box)
        throw DegenerateBBox("bbox has empty intersection with image bounds");
    if (clamped_out) *clamped_out = *box;
    RasterImage out = crop_pixels(src, *box);
    int small = std::min(out.width, out.height);
    if (min_side > 0 && small < min_side) {
        double scale = static_cast<double>(min_side) / small;
        int w, h;
        if (out.width <= out.height) {
            w = min_side;
            h = static_cast<int>(std::lround(out.height * scale));
        } else {
            h = min_side;
            w = static_cast<int>(std::lround(out.width * scale));
        }
        out = resize_image(out, w, h, filter);
    }
    return out;
}

}  // namespace hierva
