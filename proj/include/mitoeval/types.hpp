#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mitoeval/errors.hpp"

namespace mitoeval {

enum class Label { HE_AND_PHH3, HE_ONLY, PHH3_ONLY };

inline const char* to_string(Label l) {
    switch (l) {
        case Label::HE_AND_PHH3: return "HE_AND_PHH3";
        case Label::HE_ONLY: return "HE_ONLY";
        case Label::PHH3_ONLY: return "PHH3_ONLY";
    }
    throw RangeError("invalid label value");
}

inline Label label_from_string(const std::string& s) {
    if (s == "HE_AND_PHH3") return Label::HE_AND_PHH3;
    if (s == "HE_ONLY") return Label::HE_ONLY;
    if (s == "PHH3_ONLY") return Label::PHH3_ONLY;
    throw SchemaError("unknown label: " + s);
}

struct ImageMeta {
    std::string image_id;
    long width_px = 0;
    long height_px = 0;
    double mpp = 0.0; // micrometers per pixel, isotropic

    double area_mm2() const {
        return static_cast<double>(width_px) * static_cast<double>(height_px) * mpp * mpp / 1e6;
    }
};

struct PointAnnotation {
    std::string annotation_id;
    std::string rater_id;
    std::string image_id;
    double x_px = 0.0;
    double y_px = 0.0;
    Label label = Label::HE_AND_PHH3;
};

struct Box {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
};

struct Detection {
    std::string image_id;
    double x_px = 0.0;
    double y_px = 0.0;
    double confidence = 0.0;
    std::optional<Box> box;
};

// A bare ground-truth or consensus point.
struct Point {
    std::string image_id;
    double x_px = 0.0;
    double y_px = 0.0;
};

struct LabelFilter {
    std::set<Label> included;

    LabelFilter() : included{Label::HE_AND_PHH3, Label::HE_ONLY, Label::PHH3_ONLY} {}
    explicit LabelFilter(std::set<Label> labels) : included(std::move(labels)) {
        if (included.empty()) throw ConfigError("label filter must include at least one label");
    }

    bool contains(Label l) const { return included.count(l) != 0; }
};

template <typename T>
concept PointLike = requires(const T& p) {
    { p.image_id } -> std::convertible_to<std::string>;
    { p.x_px } -> std::convertible_to<double>;
    { p.y_px } -> std::convertible_to<double>;
};

// Resolves image_id references and carries per-image physical scale.
class ImageIndex {
public:
    ImageIndex() = default;
    explicit ImageIndex(const std::vector<ImageMeta>& images) {
        for (const auto& im : images) {
            if (!by_id_.emplace(im.image_id, im).second)
                throw SchemaError("duplicate image_id: " + im.image_id);
        }
    }

    const ImageMeta& require(const std::string& image_id) const {
        auto it = by_id_.find(image_id);
        if (it == by_id_.end()) throw ReferenceError("unknown image_id: " + image_id);
        return it->second;
    }

    bool contains(const std::string& image_id) const { return by_id_.count(image_id) != 0; }
    std::size_t size() const { return by_id_.size(); }

    std::vector<ImageMeta> sorted() const {
        std::vector<ImageMeta> out;
        out.reserve(by_id_.size());
        for (const auto& [id, im] : by_id_) out.push_back(im);
        return out;
    }

private:
    std::map<std::string, ImageMeta> by_id_;
};

template <PointLike A, PointLike B>
double distance_um(const A& a, const B& b, const ImageIndex& index) {
    if (a.image_id != b.image_id)
        throw CrossImageError("distance requested across images: " + std::string(a.image_id) +
                              " vs " + std::string(b.image_id));
    const double mpp = index.require(a.image_id).mpp;
    const double dx = a.x_px - b.x_px;
    const double dy = a.y_px - b.y_px;
    return mpp * std::sqrt(dx * dx + dy * dy);
}

inline std::vector<PointAnnotation> filter_labels(const std::vector<PointAnnotation>& annotations,
                                                  const LabelFilter& filter) {
    std::vector<PointAnnotation> out;
    out.reserve(annotations.size());
    for (const auto& a : annotations)
        if (filter.contains(a.label)) out.push_back(a);
    return out;
}

// Canonical order used everywhere annotations are processed: the clustering
// pass is order-sensitive, so the order is pinned at parse time.
inline void canonical_sort(std::vector<PointAnnotation>& annotations) {
    std::sort(annotations.begin(), annotations.end(),
              [](const PointAnnotation& a, const PointAnnotation& b) {
                  if (a.image_id != b.image_id) return a.image_id < b.image_id;
                  if (a.rater_id != b.rater_id) return a.rater_id < b.rater_id;
                  return a.annotation_id < b.annotation_id;
              });
}

inline std::vector<std::string> distinct_raters(const std::vector<PointAnnotation>& annotations) {
    std::set<std::string> raters;
    for (const auto& a : annotations) raters.insert(a.rater_id);
    return {raters.begin(), raters.end()};
}

struct AnnotationDocument {
    std::vector<ImageMeta> images;
    std::vector<PointAnnotation> annotations;
};

} // namespace mitoeval
