#pragma once

#include "vhslice/annotate.hpp"
#include "vhslice/frame_budget.hpp"
#include "vhslice/slicer.hpp"
#include "vhslice/volume.hpp"

#include <cstdint>
#include <set>

namespace vhs {

enum class Axis : std::uint8_t { Axial, Coronal, Sagittal };
enum class ProbeMode : std::uint8_t { Plane, Box };

const char* axis_name(Axis a);
const char* mode_name(ProbeMode m);

/// Interactive state of one viewer session. Volumes are not part of it.
struct SessionState {
    PlaneSlicer plane;
    BoxSlicer box;
    ProbeMode mode = ProbeMode::Plane;
    std::set<std::uint16_t> hidden;
    std::set<std::uint16_t> highlighted;
    /// Colour, alpha and dim; `selected` is filled from `highlighted` at render time.
    HighlightParams highlight{{}, {255, 255, 0}, 0.5, 0.6};
    FrameBudgetController controller;
    /// Sequence number of the last emitted frame (0 = none yet).
    std::uint64_t seq = 0;
};

/// Axis-aligned plane through world coordinate `position_mm` on the given axis,
/// covering the volume's voxel cells so a full-size render samples voxel centres.
///   axial:    u = +x, v = +y at z = position
///   coronal:  u = +x, v = +z at y = position
///   sagittal: u = +y, v = +z at x = position
PlaneSlicer axis_preset(const VolumeMeta& meta, Axis axis, double position_mm);

/// Box centred in the volume, identity frame, quarter-size extents.
BoxSlicer default_box(const VolumeMeta& meta);

/// Axial plane through the middle slice, default box, plane mode, nothing hidden
/// or highlighted.
SessionState default_session(const VolumeMeta& meta);

/// Restores probes, mode, visibility and highlight to defaults. Frame sequence
/// and controller state carry over.
SessionState reset_session(const SessionState& s, const VolumeMeta& meta);

} // namespace vhs
