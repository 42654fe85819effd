#include "vhslice/slicer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace vhs {

namespace {

constexpr double kBasisTolerance = 1e-9;

Vec3 pixel_to_world_unchecked(const PlaneSlicer& p, std::int64_t i, std::int64_t j, std::uint32_t ws,
                              std::uint32_t hs)
{
    const double a = ((double(i) + 0.5) / double(ws) - 0.5) * 2.0 * p.hu;
    const double b = (0.5 - (double(j) + 0.5) / double(hs)) * 2.0 * p.hv;
    return p.center + a * p.u + b * p.v;
}

std::uint8_t round_channel(double v)
{
    return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

} // namespace

void PlaneSlicer::validate() const
{
    if (!all_finite(center) || !all_finite(u) || !all_finite(v)) {
        throw std::domain_error("plane slicer: non-finite geometry");
    }
    if (std::abs(norm(u) - 1.0) > kBasisTolerance || std::abs(norm(v) - 1.0) > kBasisTolerance) {
        throw std::domain_error("plane slicer: u and v must be unit vectors");
    }
    if (std::abs(dot(u, v)) > kBasisTolerance) {
        throw std::domain_error("plane slicer: u and v must be orthogonal");
    }
    if (!(hu > 0) || !(hv > 0) || !std::isfinite(hu) || !std::isfinite(hv)) {
        throw std::domain_error("plane slicer: half-extents must be positive");
    }
    if (width < 1 || height < 1) {
        throw std::domain_error("plane slicer: resolution must be at least 1x1");
    }
}

void BoxSlicer::validate() const
{
    if (!all_finite(center)) {
        throw std::domain_error("box slicer: non-finite center");
    }
    for (std::size_t a = 0; a < 3; ++a) {
        if (!all_finite(axes[a]) || std::abs(norm(axes[a]) - 1.0) > kBasisTolerance) {
            throw std::domain_error("box slicer: axes must be unit vectors");
        }
        for (std::size_t b = a + 1; b < 3; ++b) {
            if (std::abs(dot(axes[a], axes[b])) > kBasisTolerance) {
                throw std::domain_error("box slicer: axes must be mutually orthogonal");
            }
        }
        if (!(extents[a] > 0) || !std::isfinite(extents[a])) {
            throw std::domain_error("box slicer: extents must be positive");
        }
    }
    if (dot(cross(axes[0], axes[1]), axes[2]) < 0) {
        throw std::domain_error("box slicer: axes must form a right-handed frame");
    }
    if (face_res < 1) {
        throw std::domain_error("box slicer: face resolution must be >= 1");
    }
}

std::uint32_t scaled_extent(std::uint32_t n, double scale)
{
    if (!(scale > 0.0) || scale > 1.0) {
        throw std::domain_error("scale must be in (0, 1], got " + std::to_string(scale));
    }
    const double r = std::round(double(n) * scale);
    return r < 1.0 ? 1u : static_cast<std::uint32_t>(r);
}

Vec3 plane_pixel_to_world(const PlaneSlicer& p, std::int64_t i, std::int64_t j, double scale)
{
    const std::uint32_t ws = scaled_extent(p.width, scale);
    const std::uint32_t hs = scaled_extent(p.height, scale);
    if (i < 0 || j < 0 || i >= ws || j >= hs) {
        throw std::domain_error("plane_pixel_to_world: pixel (" + std::to_string(i) + ", " + std::to_string(j) +
                                ") outside " + std::to_string(ws) + "x" + std::to_string(hs));
    }
    return pixel_to_world_unchecked(p, i, j, ws, hs);
}

SliceImage render_plane_slice(const PlaneSlicer& p, const ColorVolume& vol, const LabelVolume* labels,
                              double scale)
{
    p.validate();
    SliceImage img;
    img.width = scaled_extent(p.width, scale);
    img.height = scaled_extent(p.height, scale);
    img.rgba.assign(std::size_t(img.width) * img.height * 4, 0);
    img.labels.assign(std::size_t(img.width) * img.height, 0);
    img.geometry = {p.center, p.u, p.v, p.hu, p.hv, scale};

    for (std::uint32_t j = 0; j < img.height; ++j) {
        for (std::uint32_t i = 0; i < img.width; ++i) {
            const Vec3 w = pixel_to_world_unchecked(p, i, j, img.width, img.height);
            const auto c = sample_trilinear(vol, w);
            if (!c) {
                continue;
            }
            std::uint8_t* px = img.pixel(i, j);
            px[0] = round_channel((*c)[0]);
            px[1] = round_channel((*c)[1]);
            px[2] = round_channel((*c)[2]);
            px[3] = 255;
            if (labels != nullptr) {
                img.labels[std::size_t(j) * img.width + i] = sample_label_nearest(*labels, w).value_or(0);
            }
        }
    }
    return img;
}

const char* box_face_name(BoxFace f)
{
    switch (f) {
    case BoxFace::PosR0: return "+r0";
    case BoxFace::NegR0: return "-r0";
    case BoxFace::PosR1: return "+r1";
    case BoxFace::NegR1: return "-r1";
    case BoxFace::PosR2: return "+r2";
    case BoxFace::NegR2: return "-r2";
    }
    return "?";
}

PlaneSlicer box_face_plane(const BoxSlicer& b, BoxFace face)
{
    const std::size_t k = static_cast<std::size_t>(face) / 2;
    const bool positive = static_cast<std::size_t>(face) % 2 == 0;
    const std::size_t k1 = (k + 1) % 3;
    const std::size_t k2 = (k + 2) % 3;

    PlaneSlicer p;
    p.center = b.center + (positive ? b.extents[k] : -b.extents[k]) * b.axes[k];
    p.v = b.axes[k1];
    p.u = positive ? -b.axes[k2] : b.axes[k2];
    p.hu = b.extents[k2];
    p.hv = b.extents[k1];
    p.width = b.face_res;
    p.height = b.face_res;
    return p;
}

std::array<SliceImage, 6> render_box_faces(const BoxSlicer& b, const ColorVolume& vol, const LabelVolume* labels,
                                           double scale)
{
    b.validate();
    std::array<SliceImage, 6> out;
    for (std::size_t f = 0; f < kBoxFaces.size(); ++f) {
        out[f] = render_plane_slice(box_face_plane(b, kBoxFaces[f]), vol, labels, scale);
    }
    return out;
}

bool orthonormalize_pair(Vec3& u, Vec3& v, double tolerance)
{
    if (!all_finite(u) || !all_finite(v)) {
        return false;
    }
    if (std::abs(norm(u) - 1.0) > tolerance || std::abs(norm(v) - 1.0) > tolerance ||
        std::abs(dot(u, v)) > tolerance) {
        return false;
    }
    const Vec3 nu = normalized(u);
    const Vec3 nv = normalized(v - dot(v, nu) * nu);
    u = nu;
    v = nv;
    return true;
}

bool orthonormalize_frame(std::array<Vec3, 3>& axes, double tolerance)
{
    for (std::size_t a = 0; a < 3; ++a) {
        if (!all_finite(axes[a]) || std::abs(norm(axes[a]) - 1.0) > tolerance) {
            return false;
        }
        for (std::size_t b = a + 1; b < 3; ++b) {
            if (std::abs(dot(axes[a], axes[b])) > tolerance) {
                return false;
            }
        }
    }
    if (dot(cross(axes[0], axes[1]), axes[2]) < 0) {
        return false;
    }
    const Vec3 r0 = normalized(axes[0]);
    const Vec3 r1 = normalized(axes[1] - dot(axes[1], r0) * r0);
    Vec3 r2 = axes[2] - dot(axes[2], r0) * r0 - dot(axes[2], r1) * r1;
    r2 = normalized(r2);
    axes = {r0, r1, r2};
    return true;
}

} // namespace vhs
