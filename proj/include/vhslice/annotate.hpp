#pragma once

#include "vhslice/geometry.hpp"
#include "vhslice/slicer.hpp"
#include "vhslice/volume.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vhs {

/// 2D point in continuous pixel coordinates; pixel (i, j) covers [i, i+1) x [j, j+1).
struct Point2 {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point2&) const = default;
};

struct LabelStat {
    std::uint64_t count = 0;
    Point2 centroid;
};

struct LabelStats {
    std::map<std::uint16_t, LabelStat> per_label; // non-background only
    std::uint64_t total = 0;
};

/// Counts and pixel-centre centroids for every nonzero label.
LabelStats analyze_slice_labels(std::span<const std::uint16_t> labels, std::size_t width, std::size_t height);

inline constexpr double kDefaultMinFraction = 0.01;
inline constexpr std::size_t kDefaultMaxLabels = 8;
inline constexpr double kDefaultMinSeparationPx = 24.0;

/// Labels covering at least `min_fraction` of the non-background pixels, by
/// count descending then id ascending, at most `max_count` of them.
std::vector<std::uint16_t> select_key_labels(const LabelStats& stats, double min_fraction = kDefaultMinFraction,
                                             std::size_t max_count = kDefaultMaxLabels);

struct LabelCandidate {
    std::uint16_t id = 0;
    std::string name;
    std::uint64_t count = 0;
    Point2 centroid;
};

struct LabelAnnotation {
    std::uint16_t id = 0;
    std::string name;
    std::uint64_t count = 0;
    Point2 centroid;
    Point2 anchor; // on the image boundary; the leader line runs anchor -> centroid
};

class PlacementError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Perimeter of the [0, w] x [0, h] rectangle, walked clockwise from (0, 0)
/// along the top edge.
double perimeter_length(double width, double height);
double perimeter_position(Point2 p, double width, double height);
Point2 perimeter_point(double s, double width, double height);
double perimeter_distance(double a, double b, double perimeter);

/// Anchors each label where the ray from the image centre through its centroid
/// leaves the image, then walks conflicting anchors forward along the perimeter
/// until every pair is at least `min_sep_px` apart. Throws PlacementError when
/// the labels cannot fit.
std::vector<LabelAnnotation> place_edge_labels(std::span<const LabelCandidate> selected, std::uint32_t width,
                                               std::uint32_t height, double min_sep_px = kDefaultMinSeparationPx);

struct Ray {
    Vec3 origin;
    Vec3 direction;
};

struct PickResult {
    Vec3 world;
    std::uint32_t i = 0;
    std::uint32_t j = 0;
    std::uint16_t label_id = 0;
    std::string name;
};

/// Intersects `ray` with the slicer rectangle and reads the label from the
/// slice's own label raster. Returns nullopt on a miss. Throws std::domain_error
/// when the slice geometry does not match `plane` or the ray direction is zero.
std::optional<PickResult> pick_plane(const Ray& ray, const PlaneSlicer& plane, const SliceImage& slice,
                                     std::span<const PaletteEntry> palette = {});

struct HighlightParams {
    std::vector<std::uint16_t> selected;
    Rgb8 color{255, 255, 0};
    double alpha = 0.5;
    double dim = 1.0;

    void validate() const;
};

/// Blends selected labels toward the highlight colour and scales the rest by
/// `dim`. Transparent pixels, alpha and labels are left untouched.
SliceImage apply_highlight(const SliceImage& slice, const HighlightParams& params);

} // namespace vhs
