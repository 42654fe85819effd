#pragma once

#include "vhslice/volume.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vhs {

struct Ellipsoid {
    Vec3 center;     // mm
    Vec3 semi_axes;  // mm, all > 0
    std::uint16_t label_id = 0;
    Rgb8 color;
};

/// color(q) = base + gradient * q, with q the world point in mm; one row per channel.
struct GradientField {
    std::array<double, 3> base{0.0, 0.0, 0.0};
    std::array<Vec3, 3> per_mm{};
};

struct PhantomSpec {
    std::uint32_t nx = 0;
    std::uint32_t ny = 0;
    std::uint32_t nz = 0;
    double sx = 1.0;
    double sy = 1.0;
    std::vector<double> z_table;
    Vec3 origin;
    std::vector<PaletteEntry> palette;
    std::vector<Ellipsoid> ellipsoids; // painter's order: later wins
    Rgb8 background;
    std::optional<GradientField> gradient;
    /// Uniform integer colour noise in [-noise, noise] per channel, drawn from `seed`.
    int noise = 0;
    std::uint64_t seed = 0;

    VolumeMeta meta() const;
    void validate() const;
};

struct Phantom {
    RawColorVolume color;
    LabelVolume labels;
};

/// Throws std::domain_error on an invalid spec (zero dims, bad semi-axes, ...).
Phantom generate_phantom(const PhantomSpec& spec);

/// Index of the last ellipsoid containing q, if any.
std::optional<std::size_t> containing_ellipsoid(const PhantomSpec& spec, const Vec3& q);

/// Parses the key=value phantom description:
///
///   dims = 64 64 32
///   spacing = 1 1            # sx sy (mm)
///   z_spacing = 1            # uniform z; or `z_table = z0 z1 ...`
///   origin = 0 0 0
///   background = 0 0 0
///   seed = 7
///   noise = 0
///   label = <id> <r> <g> <b> <name...>
///   ellipsoid = <id> <cx> <cy> <cz> <ax> <ay> <az> [<r> <g> <b>]
///   gradient = <r0> <g0> <b0>  <drx> <dry> <drz>  <dgx> <dgy> <dgz>  <dbx> <dby> <dbz>
///
/// Errors are std::domain_error naming the offending key and line.
PhantomSpec parse_phantom_spec(std::istream& in);
PhantomSpec load_phantom_spec(const std::string& path);

} // namespace vhs
