#pragma once

// VHS1 container. Little-endian throughout:
//
//   "VHS1"  u32 version(=1)  u32 nx ny nz  f32 sx sy  f32 z_table[nz]  f32 origin[3]
//   u32 palette_count  { u16 id  u16 name_len  u8 name[name_len]  u8 rgb[3] }*
//   u8 has_labels
//   colour payload: nz slices in z order, BC1 blocks row-major, 8 bytes each
//   if has_labels: nz rasters, each a run list { u32 length  u16 label }* ended by length 0

#include "vhslice/volume.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vhs {

inline constexpr char kVhs1Magic[4] = {'V', 'H', 'S', '1'};
inline constexpr std::uint32_t kVhs1Version = 1;

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct VolumeFile {
    ColorVolume color;
    std::optional<LabelVolume> labels;
};

/// Serialises to bytes. Throws std::domain_error if labels disagree with the colour meta.
std::vector<std::uint8_t> encode_vhs1(const ColorVolume& color, const LabelVolume* labels);

/// Throws FormatError on bad magic, unsupported version, truncation or inconsistent content.
VolumeFile decode_vhs1(const std::vector<std::uint8_t>& bytes);

void write_vhs1(const std::string& path, const ColorVolume& color, const LabelVolume* labels);
VolumeFile read_vhs1(const std::string& path);

/// Meta as stored on disk (single-precision geometry).
VolumeMeta round_trip_meta(const VolumeMeta& meta);

} // namespace vhs
