#pragma once

#include <zlib.h>

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hierva/image.hpp"

namespace hierva {

struct PngError : std::runtime_error {
    explicit PngError(const std::string& what) : std::runtime_error(what) {}
};

namespace png_detail {

inline constexpr std::array<uint8_t, 8> kSignature = {137, 80, 78, 71, 13, 10, 26, 10};

inline void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

inline uint32_t read_u32(const uint8_t* p) {
    return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | p[3];
}

inline void append_chunk(std::vector<uint8_t>& out, const char type[4],
                         const std::vector<uint8_t>& data) {
    put_u32(out, static_cast<uint32_t>(data.size()));
    size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    uint32_t crc =
        crc32(0L, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start));
    put_u32(out, crc);
}

inline std::vector<uint8_t> zlib_compress(const std::vector<uint8_t>& data) {
    uLongf bound = compressBound(static_cast<uLong>(data.size()));
    std::vector<uint8_t> out(bound);
    // Fixed level so regeneration under the same seed stays byte-identical.
    if (compress2(out.data(), &bound, data.data(), static_cast<uLong>(data.size()), 6) != Z_OK)
        throw PngError("zlib compression failed");
    out.resize(bound);
    return out;
}

inline std::vector<uint8_t> zlib_decompress(const uint8_t* data, size_t size,
                                            size_t expected) {
    std::vector<uint8_t> out(expected);
    z_stream zs{};
    if (inflateInit(&zs) != Z_OK) throw PngError("inflateInit failed");
    zs.next_in = const_cast<Bytef*>(data);
    zs.avail_in = static_cast<uInt>(size);
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    int rc = inflate(&zs, Z_FINISH);
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || zs.total_out != expected)
        throw PngError("PNG: corrupt or truncated pixel stream");
    return out;
}

inline uint8_t paeth(int a, int b, int c) {
    int p = a + b - c;
    int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return static_cast<uint8_t>(a);
    if (pb <= pc) return static_cast<uint8_t>(b);
    return static_cast<uint8_t>(c);
}

}  // namespace png_detail

/// Encodes an RGBA raster as an 8-bit truecolor-with-alpha PNG (filter 0,
/// fixed deflate settings, non-interlaced). Output is deterministic.
inline std::vector<uint8_t> encode_png(const RasterImage& img) {
    using namespace png_detail;
    std::vector<uint8_t> out(kSignature.begin(), kSignature.end());

    std::vector<uint8_t> ihdr;
    put_u32(ihdr, static_cast<uint32_t>(img.width));
    put_u32(ihdr, static_cast<uint32_t>(img.height));
    ihdr.push_back(8);   // bit depth
    ihdr.push_back(6);   // color type RGBA
    ihdr.push_back(0);   // compression
    ihdr.push_back(0);   // filter method
    ihdr.push_back(0);   // no interlace
    append_chunk(out, "IHDR", ihdr);

    size_t stride = static_cast<size_t>(img.width) * 4;
    std::vector<uint8_t> raw;
    raw.reserve((stride + 1) * img.height);
    for (int y = 0; y < img.height; ++y) {
        raw.push_back(0);  // filter type None per scanline
        const uint8_t* row = img.rgba.data() + static_cast<size_t>(y) * stride;
        raw.insert(raw.end(), row, row + stride);
    }
    append_chunk(out, "IDAT", zlib_compress(raw));
    append_chunk(out, "IEND", {});
    return out;
}

/// Decodes an 8-bit, non-interlaced PNG (gray, gray+alpha, palette, RGB, or
/// RGBA) into an RGBA raster. Interlaced or 16-bit inputs are rejected.
inline RasterImage decode_png(const std::vector<uint8_t>& bytes,
                              const std::string& source = "") {
    using namespace png_detail;
    if (bytes.size() < 8 || !std::equal(kSignature.begin(), kSignature.end(), bytes.begin()))
        throw PngError("not a PNG file");

    int width = 0, height = 0, bit_depth = 0, color_type = 0;
    std::vector<uint8_t> idat;
    std::vector<std::array<uint8_t, 3>> palette;
    std::vector<uint8_t> trns;

    size_t pos = 8;
    bool saw_iend = false;
    while (pos + 8 <= bytes.size() && !saw_iend) {
        uint32_t len = read_u32(bytes.data() + pos);
        if (pos + 12 + len > bytes.size()) throw PngError("PNG: truncated chunk");
        std::string type(bytes.begin() + pos + 4, bytes.begin() + pos + 8);
        const uint8_t* data = bytes.data() + pos + 8;
        if (type == "IHDR") {
            if (len != 13) throw PngError("PNG: bad IHDR");
            width = static_cast<int>(read_u32(data));
            height = static_cast<int>(read_u32(data + 4));
            bit_depth = data[8];
            color_type = data[9];
            if (data[12] != 0) throw PngError("PNG: interlaced images unsupported");
            if (bit_depth != 8) throw PngError("PNG: only 8-bit depth supported");
            if (color_type != 0 && color_type != 2 && color_type != 3 && color_type != 4 &&
                color_type != 6)
                throw PngError("PNG: unsupported color type");
            if (width < 1 || height < 1) throw PngError("PNG: bad dimensions");
        } else if (type == "PLTE") {
            for (uint32_t i = 0; i + 2 < len; i += 3)
                palette.push_back({data[i], data[i + 1], data[i + 2]});
        } else if (type == "tRNS") {
            trns.assign(data, data + len);
        } else if (type == "IDAT") {
            idat.insert(idat.end(), data, data + len);
        } else if (type == "IEND") {
            saw_iend = true;
        }
        pos += 12 + len;
    }
    if (width == 0) throw PngError("PNG: missing IHDR");
    if (idat.empty()) throw PngError("PNG: missing IDAT");

    int channels = color_type == 0 ? 1 : color_type == 2 ? 3 : color_type == 3 ? 1
                   : color_type == 4                     ? 2
                                                         : 4;
    size_t stride = static_cast<size_t>(width) * channels;
    std::vector<uint8_t> raw =
        zlib_decompress(idat.data(), idat.size(), (stride + 1) * height);

    // Undo per-scanline filters in place.
    std::vector<uint8_t> pix(stride * height);
    for (int y = 0; y < height; ++y) {
        uint8_t filter = raw[(stride + 1) * y];
        const uint8_t* in = raw.data() + (stride + 1) * y + 1;
        uint8_t* cur = pix.data() + stride * y;
        const uint8_t* prev = y > 0 ? pix.data() + stride * (y - 1) : nullptr;
        for (size_t x = 0; x < stride; ++x) {
            int a = x >= static_cast<size_t>(channels) ? cur[x - channels] : 0;
            int b = prev ? prev[x] : 0;
            int c = (prev && x >= static_cast<size_t>(channels)) ? prev[x - channels] : 0;
            int v = in[x];
            switch (filter) {
                case 0: break;
                case 1: v += a; break;
                case 2: v += b; break;
                case 3: v += (a + b) / 2; break;
                case 4: v += paeth(a, b, c); break;
                default: throw PngError("PNG: unknown filter type");
            }
            cur[x] = static_cast<uint8_t>(v & 0xff);
        }
    }

    RasterImage img(width, height);
    img.source = source;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const uint8_t* p = pix.data() + stride * y + static_cast<size_t>(x) * channels;
            Rgba c;
            switch (color_type) {
                case 0: c = {p[0], p[0], p[0], 255}; break;
                case 2: c = {p[0], p[1], p[2], 255}; break;
                case 3: {
                    if (p[0] >= palette.size()) throw PngError("PNG: palette index out of range");
                    auto& e = palette[p[0]];
                    uint8_t alpha = p[0] < trns.size() ? trns[p[0]] : 255;
                    c = {e[0], e[1], e[2], alpha};
                    break;
                }
                case 4: c = {p[0], p[0], p[0], p[1]}; break;
                default: c = {p[0], p[1], p[2], p[3]}; break;
            }
            img.set(x, y, c);
        }
    }
    return img;
}

inline void save_png(const RasterImage& img, const std::string& path) {
    auto bytes = encode_png(img);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw PngError("cannot open for writing: " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

inline RasterImage load_png(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw PngError("cannot open: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                               std::istreambuf_iterator<char>());
    return decode_png(bytes, path);
}

}  // namespace hierva
