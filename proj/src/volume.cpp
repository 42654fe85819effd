#include "vhslice/volume.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace vhs {

void VolumeMeta::validate() const
{
    if (nx == 0 || ny == 0 || nz == 0) {
        throw std::domain_error("volume meta: nx, ny, nz must be >= 1");
    }
    if (!(sx > 0.0) || !(sy > 0.0) || !std::isfinite(sx) || !std::isfinite(sy)) {
        throw std::domain_error("volume meta: sx, sy must be positive and finite");
    }
    if (z_table.size() != nz) {
        throw std::domain_error("volume meta: z_table length " + std::to_string(z_table.size()) +
                                " does not match nz " + std::to_string(nz));
    }
    for (std::size_t k = 0; k < z_table.size(); ++k) {
        if (!std::isfinite(z_table[k])) {
            throw std::domain_error("volume meta: non-finite z_table entry");
        }
        if (k > 0 && !(z_table[k] > z_table[k - 1])) {
            throw std::domain_error("volume meta: z_table must be strictly increasing (index " +
                                    std::to_string(k) + ")");
        }
    }
    if (!all_finite(origin)) {
        throw std::domain_error("volume meta: non-finite origin");
    }
    std::set<std::uint16_t> ids;
    for (const auto& e : palette) {
        if (e.id == 0) {
            throw std::domain_error("volume meta: palette id 0 is reserved for background");
        }
        if (!ids.insert(e.id).second) {
            throw std::domain_error("volume meta: duplicate palette id " + std::to_string(e.id));
        }
    }
}

const PaletteEntry* VolumeMeta::find_label(std::uint16_t id) const
{
    const auto it = std::find_if(palette.begin(), palette.end(), [id](const auto& e) { return e.id == id; });
    return it == palette.end() ? nullptr : &*it;
}

std::vector<double> uniform_z_table(std::uint32_t nz, double dz, double z0)
{
    std::vector<double> z(nz);
    for (std::uint32_t k = 0; k < nz; ++k) {
        z[k] = z0 + dz * k;
    }
    return z;
}

Vec3 voxel_to_world(const VolumeMeta& meta, std::int64_t i, std::int64_t j, std::int64_t k)
{
    if (i < 0 || j < 0 || k < 0 || i >= meta.nx || j >= meta.ny || k >= meta.nz) {
        throw std::domain_error("voxel_to_world: index (" + std::to_string(i) + ", " + std::to_string(j) + ", " +
                                std::to_string(k) + ") out of range");
    }
    return {meta.origin.x + double(i) * meta.sx, meta.origin.y + double(j) * meta.sy, meta.z_table[k]};
}

ContinuousIndex world_to_continuous_index(const VolumeMeta& meta, const Vec3& p)
{
    ContinuousIndex f;
    f.x = (p.x - meta.origin.x) / meta.sx;
    f.y = (p.y - meta.origin.y) / meta.sy;

    const auto& z = meta.z_table;
    if (z.size() == 1) {
        // No interval to extrapolate from; unit spacing keeps the map monotone.
        f.z = p.z - z[0];
        return f;
    }
    const auto upper = std::upper_bound(z.begin(), z.end(), p.z);
    std::size_t k = upper == z.begin() ? 0 : std::size_t(upper - z.begin()) - 1;
    k = std::min(k, z.size() - 2);
    f.z = double(k) + (p.z - z[k]) / (z[k + 1] - z[k]);
    return f;
}

bool inside_hull(const VolumeMeta& meta, const ContinuousIndex& f)
{
    return f.x >= -kHullEpsilon && f.x <= double(meta.nx - 1) + kHullEpsilon && f.y >= -kHullEpsilon &&
           f.y <= double(meta.ny - 1) + kHullEpsilon && f.z >= -kHullEpsilon &&
           f.z <= double(meta.nz - 1) + kHullEpsilon;
}

RawColorVolume::RawColorVolume(VolumeMeta meta, std::vector<RgbImage> slices)
    : meta_(std::move(meta)), slices_(std::move(slices))
{
    meta_.validate();
    if (slices_.size() != meta_.nz) {
        throw std::domain_error("RawColorVolume: slice count does not match nz");
    }
    for (const auto& s : slices_) {
        if (s.width() != meta_.nx || s.height() != meta_.ny) {
            throw std::domain_error("RawColorVolume: slice dimensions do not match nx x ny");
        }
    }
}

ColorVolume::ColorVolume(VolumeMeta meta, std::vector<CompressedSlice> slices)
    : meta_(std::move(meta)), slices_(std::move(slices))
{
    meta_.validate();
    if (slices_.size() != meta_.nz) {
        throw std::domain_error("ColorVolume: slice count does not match nz");
    }
    for (const auto& s : slices_) {
        if (s.width() != meta_.nx || s.height() != meta_.ny) {
            throw std::domain_error("ColorVolume: slice dimensions do not match nx x ny");
        }
    }
}

std::size_t ColorVolume::payload_bytes() const
{
    std::size_t total = 0;
    for (const auto& s : slices_) {
        total += s.payload_bytes();
    }
    return total;
}

LabelVolume::LabelVolume(VolumeMeta meta, std::vector<std::uint16_t> voxels)
    : meta_(std::move(meta)), voxels_(std::move(voxels))
{
    meta_.validate();
    if (voxels_.size() != meta_.voxel_count()) {
        throw std::domain_error("LabelVolume: voxel count does not match dimensions");
    }
    std::vector<bool> known(65536, false);
    known[0] = true;
    for (const auto& e : meta_.palette) {
        known[e.id] = true;
    }
    for (const auto id : voxels_) {
        if (!known[id]) {
            throw std::domain_error("LabelVolume: label id " + std::to_string(id) + " is not in the palette");
        }
    }
}

std::optional<std::uint16_t> sample_label_nearest(const LabelVolume& lab, const Vec3& p)
{
    const VolumeMeta& m = lab.meta();
    const ContinuousIndex f = world_to_continuous_index(m, p);
    if (!inside_hull(m, f)) {
        return std::nullopt;
    }
    auto nearest = [](double v, std::uint32_t n) {
        const double r = std::floor(v + 0.5);
        return static_cast<std::size_t>(std::clamp(r, 0.0, double(n - 1)));
    };
    return lab.voxel(nearest(f.x, m.nx), nearest(f.y, m.ny), nearest(f.z, m.nz));
}

} // namespace vhs
