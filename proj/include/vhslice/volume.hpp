#pragma once

#include "vhslice/bc1.hpp"
#include "vhslice/geometry.hpp"
#include "vhslice/image.hpp"

#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace vhs {

/// Hull membership tolerance in index space. Absorbs rounding in world->index
/// mapping so node-aligned probes on the volume boundary stay inside.
inline constexpr double kHullEpsilon = 1e-9;

struct PaletteEntry {
    std::uint16_t id = 0;
    std::string name;
    Rgb8 color;

    bool operator==(const PaletteEntry&) const = default;
};

struct ContinuousIndex {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

struct VolumeMeta {
    std::uint32_t nx = 1;
    std::uint32_t ny = 1;
    std::uint32_t nz = 1;
    double sx = 1.0;
    double sy = 1.0;
    std::vector<double> z_table{0.0};
    Vec3 origin;
    std::vector<PaletteEntry> palette;

    /// Throws std::domain_error naming the first violated invariant.
    void validate() const;

    std::size_t voxel_count() const { return std::size_t(nx) * ny * nz; }
    const PaletteEntry* find_label(std::uint16_t id) const;

    bool operator==(const VolumeMeta&) const = default;
};

/// Uniform z stack helper: z_table[k] = z0 + k * dz.
std::vector<double> uniform_z_table(std::uint32_t nz, double dz, double z0 = 0.0);

Vec3 voxel_to_world(const VolumeMeta& meta, std::int64_t i, std::int64_t j, std::int64_t k);

/// Total; points outside the z range extrapolate linearly from the nearest interval.
ContinuousIndex world_to_continuous_index(const VolumeMeta& meta, const Vec3& p);

bool inside_hull(const VolumeMeta& meta, const ContinuousIndex& f);

/// Trilinear result, per channel in [0, 255].
using RgbF = std::array<double, 3>;

/// Uncompressed RGB888 slice stack. Output of phantom generation and the input
/// to compression; also sampleable directly.
class RawColorVolume {
public:
    RawColorVolume() = default;
    RawColorVolume(VolumeMeta meta, std::vector<RgbImage> slices);

    const VolumeMeta& meta() const { return meta_; }
    const std::vector<RgbImage>& slices() const { return slices_; }
    Rgb8 voxel(std::size_t i, std::size_t j, std::size_t k) const { return slices_[k].at(i, j); }
    std::size_t raw_bytes() const { return meta_.voxel_count() * 3; }

private:
    VolumeMeta meta_;
    std::vector<RgbImage> slices_;
};

/// Block-compressed colour volume, one BC1 slice per z position. Immutable.
class ColorVolume {
public:
    ColorVolume() = default;
    ColorVolume(VolumeMeta meta, std::vector<CompressedSlice> slices);

    const VolumeMeta& meta() const { return meta_; }
    const std::vector<CompressedSlice>& slices() const { return slices_; }
    Rgb8 voxel(std::size_t i, std::size_t j, std::size_t k) const
    {
        return slices_[k].decode_texel_unchecked(i, j);
    }
    std::size_t payload_bytes() const;

private:
    VolumeMeta meta_;
    std::vector<CompressedSlice> slices_;
};

class LabelVolume {
public:
    LabelVolume() = default;
    /// Throws std::domain_error if any id is neither 0 nor in the palette.
    LabelVolume(VolumeMeta meta, std::vector<std::uint16_t> voxels);

    const VolumeMeta& meta() const { return meta_; }
    const std::vector<std::uint16_t>& voxels() const { return voxels_; }
    std::uint16_t voxel(std::size_t i, std::size_t j, std::size_t k) const
    {
        return voxels_[(k * meta_.ny + j) * meta_.nx + i];
    }

    bool operator==(const LabelVolume&) const = default;

private:
    VolumeMeta meta_;
    std::vector<std::uint16_t> voxels_;
};

template <class V>
concept ColorGrid = requires(const V& v, std::size_t i) {
    { v.meta() } -> std::convertible_to<const VolumeMeta&>;
    { v.voxel(i, i, i) } -> std::convertible_to<Rgb8>;
};

/// Blends the 8 voxels around continuous index `f`. `f` must be inside the hull.
template <ColorGrid V>
RgbF trilinear_at(const V& vol, const ContinuousIndex& f)
{
    const VolumeMeta& m = vol.meta();
    auto split = [](double v, std::uint32_t n, std::size_t& lo, std::size_t& hi, double& t) {
        const double c = std::clamp(v, 0.0, double(n - 1));
        lo = static_cast<std::size_t>(std::floor(c));
        if (lo > n - 1) {
            lo = n - 1;
        }
        hi = std::min<std::size_t>(lo + 1, n - 1);
        t = c - double(lo);
    };
    std::size_t i0, i1, j0, j1, k0, k1;
    double tx, ty, tz;
    split(f.x, m.nx, i0, i1, tx);
    split(f.y, m.ny, j0, j1, ty);
    split(f.z, m.nz, k0, k1, tz);

    const std::array<Rgb8, 8> c{vol.voxel(i0, j0, k0), vol.voxel(i1, j0, k0), vol.voxel(i0, j1, k0),
                                vol.voxel(i1, j1, k0), vol.voxel(i0, j0, k1), vol.voxel(i1, j0, k1),
                                vol.voxel(i0, j1, k1), vol.voxel(i1, j1, k1)};
    const std::array<double, 8> w{(1 - tx) * (1 - ty) * (1 - tz), tx * (1 - ty) * (1 - tz),
                                  (1 - tx) * ty * (1 - tz),       tx * ty * (1 - tz),
                                  (1 - tx) * (1 - ty) * tz,       tx * (1 - ty) * tz,
                                  (1 - tx) * ty * tz,             tx * ty * tz};
    RgbF out{0.0, 0.0, 0.0};
    for (std::size_t n = 0; n < 8; ++n) {
        out[0] += w[n] * c[n].r;
        out[1] += w[n] * c[n].g;
        out[2] += w[n] * c[n].b;
    }
    return out;
}

/// Trilinear colour at world point `p`, or nullopt when `p` lies outside the
/// [0, n-1] index hull on any axis.
template <ColorGrid V>
std::optional<RgbF> sample_trilinear(const V& vol, const Vec3& p)
{
    const ContinuousIndex f = world_to_continuous_index(vol.meta(), p);
    if (!inside_hull(vol.meta(), f)) {
        return std::nullopt;
    }
    return trilinear_at(vol, f);
}

/// Nearest voxel label (ties round up per axis), or nullopt outside the hull.
std::optional<std::uint16_t> sample_label_nearest(const LabelVolume& lab, const Vec3& p);

} // namespace vhs
