#include "vhslice/session.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vhs {

namespace {

struct Bounds {
    Vec3 mid;
    Vec3 half; // half physical extent over voxel cells
};

Bounds volume_bounds(const VolumeMeta& m)
{
    const double z0 = m.z_table.front();
    const double z1 = m.z_table.back();
    Bounds b;
    b.mid = {m.origin.x + 0.5 * double(m.nx - 1) * m.sx, m.origin.y + 0.5 * double(m.ny - 1) * m.sy,
             0.5 * (z0 + z1)};
    // Cell-covering z extent: mean spacing stands in for the missing half cells at each end.
    const double dz = m.nz > 1 ? (z1 - z0) / double(m.nz - 1) : 1.0;
    b.half = {0.5 * double(m.nx) * m.sx, 0.5 * double(m.ny) * m.sy, 0.5 * double(m.nz) * dz};
    return b;
}

} // namespace

const char* axis_name(Axis a)
{
    switch (a) {
    case Axis::Axial: return "axial";
    case Axis::Coronal: return "coronal";
    case Axis::Sagittal: return "sagittal";
    }
    return "?";
}

const char* mode_name(ProbeMode m) { return m == ProbeMode::Plane ? "plane" : "box"; }

PlaneSlicer axis_preset(const VolumeMeta& meta, Axis axis, double position_mm)
{
    if (!std::isfinite(position_mm)) {
        throw std::domain_error("axis_preset: position must be finite");
    }
    const Bounds b = volume_bounds(meta);
    PlaneSlicer p;
    switch (axis) {
    case Axis::Axial:
        p.center = {b.mid.x, b.mid.y, position_mm};
        p.u = {1, 0, 0};
        p.v = {0, 1, 0};
        p.hu = b.half.x;
        p.hv = b.half.y;
        p.width = meta.nx;
        p.height = meta.ny;
        break;
    case Axis::Coronal:
        p.center = {b.mid.x, position_mm, b.mid.z};
        p.u = {1, 0, 0};
        p.v = {0, 0, 1};
        p.hu = b.half.x;
        p.hv = b.half.z;
        p.width = meta.nx;
        p.height = meta.nz;
        break;
    case Axis::Sagittal:
        p.center = {position_mm, b.mid.y, b.mid.z};
        p.u = {0, 1, 0};
        p.v = {0, 0, 1};
        p.hu = b.half.y;
        p.hv = b.half.z;
        p.width = meta.ny;
        p.height = meta.nz;
        break;
    }
    return p;
}

BoxSlicer default_box(const VolumeMeta& meta)
{
    const Bounds b = volume_bounds(meta);
    BoxSlicer box;
    box.center = b.mid;
    box.extents = {0.5 * b.half.x, 0.5 * b.half.y, 0.5 * b.half.z};
    box.face_res = 128;
    return box;
}

SessionState default_session(const VolumeMeta& meta)
{
    SessionState s;
    s.plane = axis_preset(meta, Axis::Axial, meta.z_table[meta.nz / 2]);
    s.box = default_box(meta);
    return s;
}

SessionState reset_session(const SessionState& s, const VolumeMeta& meta)
{
    SessionState out = default_session(meta);
    out.controller = s.controller;
    out.seq = s.seq;
    return out;
}

} // namespace vhs
