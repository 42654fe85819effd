#include "vhslice/annotate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

namespace vhs {

namespace {

constexpr double kSeparationSlack = 1e-9;
constexpr double kGeometryTolerance = 1e-9;

std::uint8_t round_channel(double v)
{
    return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

} // namespace

LabelStats analyze_slice_labels(std::span<const std::uint16_t> labels, std::size_t width, std::size_t height)
{
    if (labels.size() != width * height) {
        throw std::domain_error("analyze_slice_labels: raster size does not match dimensions");
    }
    struct Sum {
        std::uint64_t n = 0;
        double sx = 0.0;
        double sy = 0.0;
    };
    std::map<std::uint16_t, Sum> sums;
    for (std::size_t j = 0; j < height; ++j) {
        for (std::size_t i = 0; i < width; ++i) {
            const std::uint16_t id = labels[j * width + i];
            if (id == 0) {
                continue;
            }
            Sum& s = sums[id];
            ++s.n;
            s.sx += double(i) + 0.5;
            s.sy += double(j) + 0.5;
        }
    }
    LabelStats stats;
    for (const auto& [id, s] : sums) {
        stats.per_label[id] = {s.n, {s.sx / double(s.n), s.sy / double(s.n)}};
        stats.total += s.n;
    }
    return stats;
}

std::vector<std::uint16_t> select_key_labels(const LabelStats& stats, double min_fraction, std::size_t max_count)
{
    if (min_fraction < 0 || min_fraction > 1) {
        throw std::domain_error("select_key_labels: min_fraction must be in [0, 1]");
    }
    std::vector<std::pair<std::uint16_t, std::uint64_t>> picked;
    const double threshold = min_fraction * double(stats.total);
    for (const auto& [id, s] : stats.per_label) {
        if (double(s.count) >= threshold) {
            picked.emplace_back(id, s.count);
        }
    }
    std::sort(picked.begin(), picked.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    if (picked.size() > max_count) {
        picked.resize(max_count);
    }
    std::vector<std::uint16_t> out;
    out.reserve(picked.size());
    for (const auto& p : picked) {
        out.push_back(p.first);
    }
    return out;
}

double perimeter_length(double width, double height) { return 2.0 * (width + height); }

double perimeter_position(Point2 p, double w, double h)
{
    const double d_top = std::abs(p.y);
    const double d_right = std::abs(p.x - w);
    const double d_bottom = std::abs(p.y - h);
    const double d_left = std::abs(p.x);
    const double best = std::min({d_top, d_right, d_bottom, d_left});
    if (best == d_top) {
        return std::clamp(p.x, 0.0, w);
    }
    if (best == d_right) {
        return w + std::clamp(p.y, 0.0, h);
    }
    if (best == d_bottom) {
        return w + h + (w - std::clamp(p.x, 0.0, w));
    }
    return std::fmod(2.0 * w + h + (h - std::clamp(p.y, 0.0, h)), perimeter_length(w, h));
}

Point2 perimeter_point(double s, double w, double h)
{
    const double per = perimeter_length(w, h);
    s = std::fmod(s, per);
    if (s < 0) {
        s += per;
    }
    if (s <= w) {
        return {s, 0.0};
    }
    if (s <= w + h) {
        return {w, s - w};
    }
    if (s <= 2.0 * w + h) {
        return {w - (s - w - h), h};
    }
    return {0.0, h - (s - 2.0 * w - h)};
}

double perimeter_distance(double a, double b, double perimeter)
{
    const double d = std::fmod(std::abs(a - b), perimeter);
    return std::min(d, perimeter - d);
}

std::vector<LabelAnnotation> place_edge_labels(std::span<const LabelCandidate> selected, std::uint32_t width,
                                               std::uint32_t height, double min_sep_px)
{
    if (width < 1 || height < 1) {
        throw std::domain_error("place_edge_labels: image must be at least 1x1");
    }
    if (!(min_sep_px >= 0)) {
        throw std::domain_error("place_edge_labels: min_sep_px must be >= 0");
    }
    const double w = width;
    const double h = height;
    const double per = perimeter_length(w, h);
    if (per < min_sep_px * double(selected.size())) {
        throw PlacementError("place_edge_labels: perimeter " + std::to_string(per) + " px cannot hold " +
                             std::to_string(selected.size()) + " labels " + std::to_string(min_sep_px) +
                             " px apart");
    }

    const Point2 c{w / 2.0, h / 2.0};
    std::vector<double> placed;
    std::vector<LabelAnnotation> out;
    out.reserve(selected.size());

    for (const auto& cand : selected) {
        double dx = cand.centroid.x - c.x;
        double dy = cand.centroid.y - c.y;
        if (std::hypot(dx, dy) < 1e-12) {
            dx = 1.0;
            dy = 0.0;
        }
        double t = std::numeric_limits<double>::infinity();
        if (dx > 0) {
            t = std::min(t, (w - c.x) / dx);
        } else if (dx < 0) {
            t = std::min(t, -c.x / dx);
        }
        if (dy > 0) {
            t = std::min(t, (h - c.y) / dy);
        } else if (dy < 0) {
            t = std::min(t, -c.y / dy);
        }
        const Point2 hit{std::clamp(c.x + t * dx, 0.0, w), std::clamp(c.y + t * dy, 0.0, h)};

        double s = perimeter_position(hit, w, h);
        bool moved = false;
        double travel = 0.0;
        for (;;) {
            const auto clash = std::find_if(placed.begin(), placed.end(), [&](double a) {
                return perimeter_distance(s, a, per) < min_sep_px - kSeparationSlack;
            });
            if (clash == placed.end()) {
                break;
            }
            const double target = std::fmod(*clash + min_sep_px, per);
            travel += std::fmod(target - s + per, per);
            if (travel >= per) {
                throw PlacementError("place_edge_labels: no free perimeter slot for label " +
                                     std::to_string(cand.id));
            }
            s = target;
            moved = true;
        }
        placed.push_back(s);

        LabelAnnotation a;
        a.id = cand.id;
        a.name = cand.name;
        a.count = cand.count;
        a.centroid = cand.centroid;
        a.anchor = moved ? perimeter_point(s, w, h) : hit;
        out.push_back(std::move(a));
    }
    return out;
}

std::optional<PickResult> pick_plane(const Ray& ray, const PlaneSlicer& plane, const SliceImage& slice,
                                     std::span<const PaletteEntry> palette)
{
    const SliceGeometry& g = slice.geometry;
    if (max_abs_diff(g.center, plane.center) > kGeometryTolerance || max_abs_diff(g.u, plane.u) > kGeometryTolerance ||
        max_abs_diff(g.v, plane.v) > kGeometryTolerance || std::abs(g.hu - plane.hu) > kGeometryTolerance ||
        std::abs(g.hv - plane.hv) > kGeometryTolerance || slice.width != scaled_extent(plane.width, g.scale) ||
        slice.height != scaled_extent(plane.height, g.scale)) {
        throw std::domain_error("pick_plane: slice geometry does not match the plane");
    }
    const double dn = norm(ray.direction);
    if (!(dn > 0) || !all_finite(ray.direction) || !all_finite(ray.origin)) {
        throw std::domain_error("pick_plane: ray direction must be finite and non-zero");
    }

    const Vec3 n = plane.normal();
    const double denom = dot(ray.direction, n);
    if (std::abs(denom) < 1e-9 * dn) {
        return std::nullopt;
    }
    const double t = dot(plane.center - ray.origin, n) / denom;
    if (t < 0) {
        return std::nullopt;
    }
    const Vec3 q = ray.origin + t * ray.direction;
    const double a = dot(q - plane.center, plane.u);
    const double b = dot(q - plane.center, plane.v);
    if (std::abs(a) > plane.hu || std::abs(b) > plane.hv) {
        return std::nullopt;
    }

    auto cell = [](double f, std::uint32_t n_px) {
        const double v = std::floor(f * double(n_px));
        return static_cast<std::uint32_t>(std::clamp(v, 0.0, double(n_px - 1)));
    };
    PickResult r;
    // Project back onto the plane so the reported point lies on it exactly.
    r.world = plane.center + a * plane.u + b * plane.v;
    r.i = cell(a / (2.0 * plane.hu) + 0.5, slice.width);
    r.j = cell(0.5 - b / (2.0 * plane.hv), slice.height);
    r.label_id = slice.label(r.i, r.j);
    for (const auto& e : palette) {
        if (e.id == r.label_id) {
            r.name = e.name;
            break;
        }
    }
    return r;
}

void HighlightParams::validate() const
{
    if (!(alpha >= 0 && alpha <= 1) || !(dim >= 0 && dim <= 1)) {
        throw std::domain_error("highlight: alpha and dim must lie in [0, 1]");
    }
}

SliceImage apply_highlight(const SliceImage& slice, const HighlightParams& params)
{
    params.validate();
    const std::unordered_set<std::uint16_t> selected(params.selected.begin(), params.selected.end());
    SliceImage out = slice;
    const double hc[3] = {double(params.color.r), double(params.color.g), double(params.color.b)};
    for (std::size_t n = 0; n < out.labels.size(); ++n) {
        std::uint8_t* px = &out.rgba[n * 4];
        if (px[3] == 0) {
            continue;
        }
        if (selected.contains(out.labels[n])) {
            for (int c = 0; c < 3; ++c) {
                px[c] = round_channel((1.0 - params.alpha) * px[c] + params.alpha * hc[c]);
            }
        } else {
            for (int c = 0; c < 3; ++c) {
                px[c] = round_channel(px[c] * params.dim);
            }
        }
    }
    return out;
}

} // namespace vhs
