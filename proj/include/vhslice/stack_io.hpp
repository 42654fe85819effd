#pragma once

#include "vhslice/volume.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vhs {

/// Bad or inconsistent input files (as opposed to I/O failures while writing).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Spacing manifest of a slice directory:
///
///   sx=0.5
///   sy=0.5
///   origin=0 0 0        (optional)
///   z_table:
///   0
///   1.5
///   ...
struct SliceManifest {
    double sx = 1.0;
    double sy = 1.0;
    Vec3 origin;
    std::vector<double> z_table;
};

inline constexpr const char* kManifestName = "manifest.txt";
inline constexpr const char* kPaletteName = "palette.txt";
inline constexpr const char* kLabelDirName = "labels";

SliceManifest parse_manifest(std::istream& in);
std::string format_manifest(const SliceManifest& m);

/// One entry per line: `<id> <r> <g> <b> <name...>`.
std::vector<PaletteEntry> parse_palette(std::istream& in);
std::string format_palette(const std::vector<PaletteEntry>& palette);

/// Writes slice_NNNN.ppm, manifest.txt, palette.txt and, when given, labels/slice_NNNN.pgm.
void write_slice_stack(const std::string& dir, const RawColorVolume& color, const LabelVolume* labels);

struct SliceStack {
    RawColorVolume color;
    std::optional<LabelVolume> labels;
};

/// Reads every .ppm/.png in `dir` in lexicographic order. Uses palette.txt when
/// present and labels/*.pgm when `with_labels` is set. Throws InputError naming
/// the offending file on a missing manifest, a count mismatch or mixed dimensions.
SliceStack read_slice_stack(const std::string& dir, bool with_labels);

} // namespace vhs
