#pragma once

#include "vhslice/bc1.hpp"
#include "vhslice/volume.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vhs {

struct ColorKey {
    std::uint16_t label_id = 0;
    Rgb8 key;
    std::array<int, 3> tolerance{0, 0, 0};
};

/// First match in list order wins.
struct ColorKeyTable {
    std::vector<ColorKey> entries;
};

/// Box-mean downsampling, rounded half up; edge boxes are truncated.
/// Throws std::domain_error for factor 0.
RgbImage downsample_slice(const RgbImage& img, std::uint32_t factor);

/// Picks the voxel nearest each output box centre. Used only where exact
/// labels already exist at full resolution.
LabelRaster downsample_labels_nearest(const LabelRaster& labels, std::uint32_t factor);

/// Per-slice downsample_labels_nearest over a whole label volume.
LabelVolume downsample_label_volume(const LabelVolume& labels, std::uint32_t factor);

LabelRaster map_colors_to_labels(const RgbImage& img, const ColorKeyTable& table);

/// Meta of a volume downsampled in-plane by `factor`: counts ceil(n/f), spacing * f,
/// origin shifted to the first box centre. z is untouched.
VolumeMeta downsampled_meta(const VolumeMeta& meta, std::uint32_t factor);

struct CompressionResult {
    ColorVolume color;
    std::optional<LabelVolume> labels;
};

/// Downsample -> optional colour-key labelling -> BC1 per slice.
/// Label ids produced by `table` must appear in the stack's palette.
CompressionResult compress_volume(const RawColorVolume& stack, std::uint32_t factor,
                                  const std::optional<ColorKeyTable>& table);

/// Parses a colour-key file, one entry per line: `<id> <r> <g> <b> <tolerance> <name...>`.
/// Also returns the palette implied by the entries (key colour as display colour).
struct ColorKeyFile {
    ColorKeyTable table;
    std::vector<PaletteEntry> palette;
};
ColorKeyFile parse_color_keys(std::istream& in);

} // namespace vhs
