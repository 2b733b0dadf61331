#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "hierva/font5x7.hpp"
#include "hierva/image.hpp"

namespace hierva {

/// Minimal deterministic vector-graphics scene for chart rendering: emits
/// SVG markup and rasterizes to a RasterImage with no anti-aliasing, so the
/// same scene always produces the same bytes.
namespace vec {

enum class Anchor { Left, Center, Right };

struct FillRect {
    double x, y, w, h;
    Rgba color;
};
struct StrokeRect {
    double x, y, w, h;
    Rgba color;
    double width = 1.0;
};
struct Line {
    double x1, y1, x2, y2;
    Rgba color;
    double width = 1.0;
};
struct Polyline {
    std::vector<std::pair<double, double>> points;
    Rgba color;
    double width = 1.0;
};
struct Disk {
    double cx, cy, r;
    Rgba color;
};
struct Wedge {
    double cx, cy, r;
    double a0, a1;  // radians, counter-clockwise from +x
    Rgba color;
};
struct Text {
    double x, y;  // top-left of the text box (y grows downward)
    int size;     // glyph pixel height (multiple of 7 renders crisp)
    Rgba color;
    std::string text;
    Anchor anchor = Anchor::Left;
};

using Item = std::variant<FillRect, StrokeRect, Line, Polyline, Disk, Wedge, Text>;

struct Scene {
    int width = 0;
    int height = 0;
    Rgba background{255, 255, 255, 255};
    std::vector<Item> items;

    void add(Item item) { items.push_back(std::move(item)); }
};

namespace detail {

inline std::string fmt(double v) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(2);
    os << v;
    return os.str();
}

inline std::string color_attr(const Rgba& c) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", c.r, c.g, c.b);
    return buf;
}

inline double dist_to_segment(double px, double py, const Line& l) {
    double dx = l.x2 - l.x1, dy = l.y2 - l.y1;
    double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((px - l.x1) * dx + (py - l.y1) * dy) / len2 : 0.0;
    t = std::max(0.0, std::min(1.0, t));
    double qx = l.x1 + t * dx, qy = l.y1 + t * dy;
    return std::hypot(px - qx, py - qy);
}

inline void raster_fill_rect(RasterImage& img, const FillRect& r) {
    int x0 = std::max(0, static_cast<int>(std::lround(r.x)));
    int y0 = std::max(0, static_cast<int>(std::lround(r.y)));
    int x1 = std::min(img.width, static_cast<int>(std::lround(r.x + r.w)));
    int y1 = std::min(img.height, static_cast<int>(std::lround(r.y + r.h)));
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) img.set(x, y, r.color);
}

inline void raster_line(RasterImage& img, const Line& l) {
    double half = std::max(0.5, l.width / 2.0);
    int x0 = std::max(0, static_cast<int>(std::floor(std::min(l.x1, l.x2) - half)));
    int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(std::max(l.x1, l.x2) + half)));
    int y0 = std::max(0, static_cast<int>(std::floor(std::min(l.y1, l.y2) - half)));
    int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(std::max(l.y1, l.y2) + half)));
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x)
            if (dist_to_segment(x + 0.5, y + 0.5, l) <= half) img.set(x, y, l.color);
}

inline void raster_text(RasterImage& img, const Text& t) {
    int scale = std::max(1, t.size / kGlyphHeight);
    int total = text_width(t.text, scale);
    int x0 = static_cast<int>(std::lround(t.x));
    if (t.anchor == Anchor::Center) x0 -= total / 2;
    if (t.anchor == Anchor::Right) x0 -= total;
    int y0 = static_cast<int>(std::lround(t.y));

    int pen = x0;
    for (char c : t.text) {
        const Glyph& g = glyph_for(c);
        for (int row = 0; row < kGlyphHeight; ++row) {
            for (int col = 0; col < kGlyphWidth; ++col) {
                if (!(g.rows[row] & (1 << (kGlyphWidth - 1 - col)))) continue;
                for (int sy = 0; sy < scale; ++sy)
                    for (int sx = 0; sx < scale; ++sx) {
                        int px = pen + col * scale + sx;
                        int py = y0 + row * scale + sy;
                        if (px >= 0 && px < img.width && py >= 0 && py < img.height)
                            img.set(px, py, t.color);
                    }
            }
        }
        pen += (kGlyphWidth + kGlyphSpacing) * scale;
    }
}

}  // namespace detail

inline RasterImage rasterize(const Scene& scene) {
    RasterImage img(scene.width, scene.height, scene.background);
    using namespace detail;
    for (const auto& item : scene.items) {
        if (const auto* r = std::get_if<FillRect>(&item)) {
            raster_fill_rect(img, *r);
        } else if (const auto* r = std::get_if<StrokeRect>(&item)) {
            double w = r->width;
            raster_line(img, {r->x, r->y, r->x + r->w, r->y, r->color, w});
            raster_line(img, {r->x, r->y + r->h, r->x + r->w, r->y + r->h, r->color, w});
            raster_line(img, {r->x, r->y, r->x, r->y + r->h, r->color, w});
            raster_line(img, {r->x + r->w, r->y, r->x + r->w, r->y + r->h, r->color, w});
        } else if (const auto* l = std::get_if<Line>(&item)) {
            raster_line(img, *l);
        } else if (const auto* p = std::get_if<Polyline>(&item)) {
            for (size_t i = 0; i + 1 < p->points.size(); ++i)
                raster_line(img, {p->points[i].first, p->points[i].second,
                                  p->points[i + 1].first, p->points[i + 1].second, p->color,
                                  p->width});
        } else if (const auto* d = std::get_if<Disk>(&item)) {
            int x0 = std::max(0, static_cast<int>(std::floor(d->cx - d->r)));
            int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(d->cx + d->r)));
            int y0 = std::max(0, static_cast<int>(std::floor(d->cy - d->r)));
            int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(d->cy + d->r)));
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x)
                    if (std::hypot(x + 0.5 - d->cx, y + 0.5 - d->cy) <= d->r)
                        img.set(x, y, d->color);
        } else if (const auto* w = std::get_if<Wedge>(&item)) {
            int x0 = std::max(0, static_cast<int>(std::floor(w->cx - w->r)));
            int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(w->cx + w->r)));
            int y0 = std::max(0, static_cast<int>(std::floor(w->cy - w->r)));
            int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(w->cy + w->r)));
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    double dx = x + 0.5 - w->cx, dy = y + 0.5 - w->cy;
                    if (std::hypot(dx, dy) > w->r) continue;
                    double a = std::atan2(-dy, dx);  // y grows downward
                    if (a < 0) a += 2 * M_PI;
                    double a0 = w->a0, a1 = w->a1;
                    if (a0 <= a1 ? (a >= a0 && a < a1) : (a >= a0 || a < a1))
                        img.set(x, y, w->color);
                }
        } else if (const auto* t = std::get_if<Text>(&item)) {
            raster_text(img, *t);
        }
    }
    return img;
}

/// Structured-markup emission of the same scene.
inline std::string emit_svg(const Scene& scene) {
    using namespace detail;
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                      std::to_string(scene.width) + "\" height=\"" +
                      std::to_string(scene.height) + "\" viewBox=\"0 0 " +
                      std::to_string(scene.width) + " " + std::to_string(scene.height) +
                      "\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(scene.width) + "\" height=\"" +
           std::to_string(scene.height) + "\" fill=\"" + color_attr(scene.background) +
           "\"/>\n";
    for (const auto& item : scene.items) {
        if (const auto* r = std::get_if<FillRect>(&item)) {
            out += "<rect x=\"" + fmt(r->x) + "\" y=\"" + fmt(r->y) + "\" width=\"" +
                   fmt(r->w) + "\" height=\"" + fmt(r->h) + "\" fill=\"" +
                   color_attr(r->color) + "\"/>\n";
        } else if (const auto* r = std::get_if<StrokeRect>(&item)) {
            out += "<rect x=\"" + fmt(r->x) + "\" y=\"" + fmt(r->y) + "\" width=\"" +
                   fmt(r->w) + "\" height=\"" + fmt(r->h) + "\" fill=\"none\" stroke=\"" +
                   color_attr(r->color) + "\" stroke-width=\"" + fmt(r->width) + "\"/>\n";
        } else if (const auto* l = std::get_if<Line>(&item)) {
            out += "<line x1=\"" + fmt(l->x1) + "\" y1=\"" + fmt(l->y1) + "\" x2=\"" +
                   fmt(l->x2) + "\" y2=\"" + fmt(l->y2) + "\" stroke=\"" +
                   color_attr(l->color) + "\" stroke-width=\"" + fmt(l->width) + "\"/>\n";
        } else if (const auto* p = std::get_if<Polyline>(&item)) {
            out += "<polyline fill=\"none\" stroke=\"" + color_attr(p->color) +
                   "\" stroke-width=\"" + fmt(p->width) + "\" points=\"";
            for (size_t i = 0; i < p->points.size(); ++i) {
                if (i) out += " ";
                out += fmt(p->points[i].first) + "," + fmt(p->points[i].second);
            }
            out += "\"/>\n";
        } else if (const auto* d = std::get_if<Disk>(&item)) {
            out += "<circle cx=\"" + fmt(d->cx) + "\" cy=\"" + fmt(d->cy) + "\" r=\"" +
                   fmt(d->r) + "\" fill=\"" + color_attr(d->color) + "\"/>\n";
        } else if (const auto* w = std::get_if<Wedge>(&item)) {
            double x0 = w->cx + w->r * std::cos(w->a0), y0 = w->cy - w->r * std::sin(w->a0);
            double x1 = w->cx + w->r * std::cos(w->a1), y1 = w->cy - w->r * std::sin(w->a1);
            double span = w->a1 - w->a0;
            if (span < 0) span += 2 * M_PI;
            int large = span > M_PI ? 1 : 0;
            out += "<path d=\"M " + fmt(w->cx) + " " + fmt(w->cy) + " L " + fmt(x0) + " " +
                   fmt(y0) + " A " + fmt(w->r) + " " + fmt(w->r) + " 0 " +
                   std::to_string(large) + " 0 " + fmt(x1) + " " + fmt(y1) + " Z\" fill=\"" +
                   color_attr(w->color) + "\"/>\n";
        } else if (const auto* t = std::get_if<Text>(&item)) {
            std::string anchor = t->anchor == Anchor::Left     ? "start"
                                 : t->anchor == Anchor::Center ? "middle"
                                                               : "end";
            std::string escaped;
            for (char c : t->text) {
                if (c == '&') escaped += "&amp;";
                else if (c == '<') escaped += "&lt;";
                else if (c == '>') escaped += "&gt;";
                else escaped.push_back(c);
            }
            out += "<text x=\"" + fmt(t->x) + "\" y=\"" + fmt(t->y + t->size) +
                   "\" font-family=\"monospace\" font-size=\"" + std::to_string(t->size) +
                   "\" fill=\"" + color_attr(t->color) + "\" text-anchor=\"" + anchor +
                   "\">" + escaped + "</text>\n";
        }
    }
    out += "</svg>\n";
    return out;
}

}  // namespace vec
}  // namespace hierva
