#pragma once

#include "vhslice/geometry.hpp"
#include "vhslice/volume.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace vhs {

/// Parametric rectangle sampled into a raster. Pixel row 0 is the +v edge.
struct PlaneSlicer {
    Vec3 center;
    Vec3 u{1, 0, 0};
    Vec3 v{0, 1, 0};
    double hu = 1.0;
    double hv = 1.0;
    std::uint32_t width = 1;
    std::uint32_t height = 1;

    Vec3 normal() const { return cross(u, v); }

    /// Throws std::domain_error unless u, v are orthonormal within 1e-9, extents
    /// are positive and the resolution is at least 1x1.
    void validate() const;

    bool operator==(const PlaneSlicer&) const = default;
};

/// Oriented box; axes[k] is r_k. Must be a right-handed orthonormal frame.
struct BoxSlicer {
    Vec3 center;
    std::array<Vec3, 3> axes{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
    std::array<double, 3> extents{1.0, 1.0, 1.0};
    std::uint32_t face_res = 64;

    void validate() const;

    bool operator==(const BoxSlicer&) const = default;
};

/// Enough to invert pixel -> world for a rendered slice.
struct SliceGeometry {
    Vec3 center;
    Vec3 u;
    Vec3 v;
    double hu = 0.0;
    double hv = 0.0;
    double scale = 1.0;

    bool operator==(const SliceGeometry&) const = default;
};

struct SliceImage {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<std::uint8_t> rgba; // width * height * 4
    std::vector<std::uint16_t> labels;
    SliceGeometry geometry;

    std::uint8_t* pixel(std::size_t i, std::size_t j) { return &rgba[(j * width + i) * 4]; }
    const std::uint8_t* pixel(std::size_t i, std::size_t j) const { return &rgba[(j * width + i) * 4]; }
    std::uint16_t label(std::size_t i, std::size_t j) const { return labels[j * width + i]; }

    bool operator==(const SliceImage&) const = default;
};

/// round(n * s), at least 1. Throws std::domain_error unless 0 < s <= 1.
std::uint32_t scaled_extent(std::uint32_t n, double scale);

/// World point of pixel (i, j)'s centre at scale `s`.
Vec3 plane_pixel_to_world(const PlaneSlicer& p, std::int64_t i, std::int64_t j, double scale);

/// Samples trilinear colour (alpha 0 outside the hull) and nearest labels.
/// `labels` may be null, in which case the label raster is all zero.
SliceImage render_plane_slice(const PlaneSlicer& p, const ColorVolume& vol, const LabelVolume* labels,
                              double scale);

enum class BoxFace : std::uint8_t { PosR0, NegR0, PosR1, NegR1, PosR2, NegR2 };

inline constexpr std::array<BoxFace, 6> kBoxFaces{BoxFace::PosR0, BoxFace::NegR0, BoxFace::PosR1,
                                                  BoxFace::NegR1, BoxFace::PosR2, BoxFace::NegR2};

const char* box_face_name(BoxFace f);

/// Face plane with u x v equal to the outward normal. For face +r_k:
/// v = r_{k+1}, u = -r_{k+2}; for -r_k: v = r_{k+1}, u = r_{k+2}.
PlaneSlicer box_face_plane(const BoxSlicer& b, BoxFace face);

/// Six faces in kBoxFaces order.
std::array<SliceImage, 6> render_box_faces(const BoxSlicer& b, const ColorVolume& vol, const LabelVolume* labels,
                                           double scale);

/// Gram-Schmidt repair for client-supplied frames. Succeeds only when the input
/// is already within `tolerance` of orthonormal; returns false otherwise.
bool orthonormalize_pair(Vec3& u, Vec3& v, double tolerance);
bool orthonormalize_frame(std::array<Vec3, 3>& axes, double tolerance);

} // namespace vhs
