// Independent reference implementations used as test oracles. These must
// stay decoupled from the library code paths they check: each one recomputes
// its answer from first principles (per-pixel copies, interval arithmetic,
// explicit brace trees) rather than calling into hierva internals.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <hierva/image.hpp>

namespace oracle {

struct ClampedBox {
    int x1, y1, x2, y2;
};

/// Interval-intersection clamping: round each coordinate, intersect [x1,x2]
/// with [0,w] and [y1,y2] with [0,h]; empty intersection => nullopt.
inline std::optional<ClampedBox> clamp_interval(double x1, double y1, double x2, double y2,
                                                int w, int h) {
    auto r = [](double v) { return static_cast<int>(std::llround(v)); };
    int ax1 = std::max(0, std::min(r(x1), w));
    int ax2 = std::max(0, std::min(r(x2), w));
    int ay1 = std::max(0, std::min(r(y1), h));
    int ay2 = std::max(0, std::min(r(y2), h));
    if (ax2 - ax1 <= 0 || ay2 - ay1 <= 0) return std::nullopt;
    return ClampedBox{ax1, ay1, ax2, ay2};
}

/// Brute-force per-pixel crop: copies each pixel one at a time.
inline hierva::RasterImage pixel_copy_crop(const hierva::RasterImage& src, const ClampedBox& b) {
    hierva::RasterImage out(b.x2 - b.x1, b.y2 - b.y1);
    for (int y = b.y1; y < b.y2; ++y)
        for (int x = b.x1; x < b.x2; ++x) out.set(x - b.x1, y - b.y1, src.at(x, y));
    return out;
}

// ---- balanced-brace oracle for \boxed{} extraction ----

struct BraceNode {
    size_t open = 0;   // position of '{'
    size_t close = 0;  // position of matching '}'
    std::vector<BraceNode> children;
};

/// Parses the whole text into a forest of balanced brace groups (escaped
/// braces skipped), then picks the content of the last group immediately
/// preceded by "\boxed".
inline std::optional<std::string> boxed_by_brace_tree(const std::string& text) {
    std::vector<BraceNode> forest;
    std::vector<BraceNode> stack;
    for (size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\\' && i + 1 < text.size() &&
            (text[i + 1] == '{' || text[i + 1] == '}')) {
            ++i;
            continue;
        }
        if (text[i] == '{') {
            stack.push_back(BraceNode{i, 0, {}});
        } else if (text[i] == '}' && !stack.empty()) {
            BraceNode node = stack.back();
            stack.pop_back();
            node.close = i;
            if (stack.empty())
                forest.push_back(node);
            else
                stack.back().children.push_back(node);
        }
    }
    // Unclosed opens never form groups, but their balanced children do.
    for (const auto& stranded : stack)
        for (const auto& c : stranded.children) forest.push_back(c);

    static const std::string marker = "\\boxed";
    auto is_boxed = [&](const BraceNode& n) {
        return n.open >= marker.size() &&
               text.compare(n.open - marker.size(), marker.size(), marker) == 0;
    };

    // A \boxed group swallows everything inside it, so do not descend into
    // one looking for further groups.
    std::optional<std::string> last;
    size_t best_open = 0;
    std::function<void(const BraceNode&)> walk = [&](const BraceNode& n) {
        if (is_boxed(n)) {
            if (!last || n.open > best_open) {
                best_open = n.open;
                last = text.substr(n.open + 1, n.close - n.open - 1);
            }
            return;
        }
        for (const auto& c : n.children) walk(c);
    };
    for (const auto& n : forest) walk(n);
    return last;
}

}  // namespace oracle
