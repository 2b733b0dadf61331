#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "hierva/image.hpp"

namespace hierva {

/// Image address within one episode: index 0 is the original chart, index
/// k >= 1 is the latest crop produced by worker k.
struct ImageRef {
    int index = 0;
    bool operator==(const ImageRef&) const = default;
    auto operator<=>(const ImageRef&) const = default;
};

struct UnresolvedRef : std::runtime_error {
    explicit UnresolvedRef(const std::string& what) : std::runtime_error(what) {}
};
struct DoubleInit : std::runtime_error {
    explicit DoubleInit(const std::string& what) : std::runtime_error(what) {}
};

/// Per-episode store for the original chart and all worker-produced crops.
/// Only the latest crop per worker is addressable by ImageRef; superseded
/// crops stay in the record list for trace replay. Single writer (the
/// episode loop); concurrent readers are fine once registered.
class ImageRegistry {
public:
    struct CropRecord {
        int worker_id = 0;           // 0 for the original chart
        ImageRef src{0};             // image the crop was taken from
        IntBox clamped_bbox;         // empty box for the original
        int parent = -1;             // index into records(); -1 = original
        std::shared_ptr<const RasterImage> image;
    };

    struct CropResult {
        std::shared_ptr<const RasterImage> image;
        ImageRef src{0};
        IntBox clamped_bbox;
        int parent = -1;
    };

    ImageRef register_original(RasterImage img) {
        if (!records_.empty()) throw DoubleInit("registry already holds an original chart");
        auto ptr = std::make_shared<const RasterImage>(std::move(img));
        records_.push_back({0, ImageRef{0}, IntBox{}, -1, ptr});
        latest_[0] = 0;
        return ImageRef{0};
    }

    bool resolvable(ImageRef ref) const { return latest_.count(ref.index) > 0; }

    std::shared_ptr<const RasterImage> resolve(ImageRef ref) const {
        auto it = latest_.find(ref.index);
        if (it == latest_.end())
            throw UnresolvedRef("image index " + std::to_string(ref.index) +
                                " does not resolve (no crop from that worker yet)");
        return records_[it->second].image;
    }

    /// Crops with clamping and the min-side resize contract; records the
    /// lineage (source ref, clamped bbox, parent record) without making the
    /// result addressable. Throws UnresolvedRef / DegenerateBBox.
    CropResult crop(ImageRef src, const BBox& bbox, int min_side,
                    ResizeFilter filter = ResizeFilter::Nearest) const {
        auto base = resolve(src);
        IntBox clamped;
        RasterImage out = crop_and_resize(*base, bbox, min_side, filter, &clamped);
        out.source = "crop of image " + std::to_string(src.index) + " bbox [" +
                     std::to_string(clamped.x1) + "," + std::to_string(clamped.y1) + "," +
                     std::to_string(clamped.x2) + "," + std::to_string(clamped.y2) + "]";
        CropResult res;
        res.image = std::make_shared<const RasterImage>(std::move(out));
        res.src = src;
        res.clamped_bbox = clamped;
        res.parent = static_cast<int>(latest_.at(src.index));
        return res;
    }

    /// Stores a crop as the latest image of `worker_id` (>= 1).
    ImageRef record_crop(int worker_id, CropResult crop) {
        if (worker_id < 1) throw std::invalid_argument("record_crop: worker_id must be >= 1");
        records_.push_back({worker_id, crop.src, crop.clamped_bbox, crop.parent, crop.image});
        latest_[worker_id] = records_.size() - 1;
        return ImageRef{worker_id};
    }

    ImageRef record_crop(int worker_id, RasterImage img) {
        CropResult r;
        r.image = std::make_shared<const RasterImage>(std::move(img));
        r.src = ImageRef{0};
        r.parent = records_.empty() ? -1 : 0;
        return record_crop(worker_id, std::move(r));
    }

    const std::vector<CropRecord>& records() const { return records_; }

    /// Follows parent links from a record back to the original; used to
    /// check lineage termination and to serialize crop chains into traces.
    std::vector<int> lineage(int record_index) const {
        std::vector<int> chain;
        int i = record_index;
        while (i >= 0) {
            chain.push_back(i);
            i = records_[static_cast<size_t>(i)].parent;
        }
        return chain;
    }

private:
    std::vector<CropRecord> records_;
    std::map<int, size_t> latest_;
};

}  // namespace hierva
