#include "support.hpp"

#include "vhslice/annotate.hpp"

#include <gtest/gtest.h>

using namespace vhs;
using namespace vhs::testing;

namespace {

bool on_boundary(Point2 p, double w, double h)
{
    const double eps = 1e-9;
    const bool in_x = p.x >= -eps && p.x <= w + eps;
    const bool in_y = p.y >= -eps && p.y <= h + eps;
    const bool edge = std::abs(p.x) < eps || std::abs(p.x - w) < eps || std::abs(p.y) < eps || std::abs(p.y - h) < eps;
    return in_x && in_y && edge;
}

SliceImage flat_slice(std::uint32_t w, std::uint32_t h, Rgb8 c, std::uint16_t label)
{
    SliceImage s;
    s.width = w;
    s.height = h;
    s.rgba.resize(std::size_t(w) * h * 4);
    s.labels.assign(std::size_t(w) * h, label);
    for (std::size_t n = 0; n < s.labels.size(); ++n) {
        s.rgba[4 * n] = c.r;
        s.rgba[4 * n + 1] = c.g;
        s.rgba[4 * n + 2] = c.b;
        s.rgba[4 * n + 3] = 255;
    }
    return s;
}

} // namespace

TEST(LabelStatsTest, AllBackground)
{
    std::vector<std::uint16_t> r(16, 0);
    const auto s = analyze_slice_labels(r, 4, 4);
    EXPECT_TRUE(s.per_label.empty());
    EXPECT_EQ(s.total, 0u);
}

TEST(LabelStatsTest, LeftTwoColumns)
{
    std::vector<std::uint16_t> r(16, 0);
    for (int y = 0; y < 4; ++y) {
        r[y * 4] = 7;
        r[y * 4 + 1] = 7;
    }
    const auto s = analyze_slice_labels(r, 4, 4);
    ASSERT_EQ(s.per_label.size(), 1u);
    EXPECT_EQ(s.per_label.at(7).count, 8u);
    EXPECT_DOUBLE_EQ(s.per_label.at(7).centroid.x, 1.0);
    EXPECT_DOUBLE_EQ(s.per_label.at(7).centroid.y, 2.0);
}

TEST(LabelStatsTest, SizeMismatchThrows)
{
    std::vector<std::uint16_t> r(15, 0);
    EXPECT_THROW(analyze_slice_labels(r, 4, 4), std::domain_error);
}

TEST(LabelStatsTest, CentroidsInsideBoundingBoxes)
{
    std::mt19937_64 rng(3);
    for (int n = 0; n < 20; ++n) {
        const std::size_t w = 1 + rng() % 40, h = 1 + rng() % 40;
        std::vector<std::uint16_t> r(w * h);
        for (auto& id : r) {
            id = std::uint16_t(rng() % 6);
        }
        const auto s = analyze_slice_labels(r, w, h);
        std::uint64_t sum = 0;
        for (const auto& [id, st] : s.per_label) {
            sum += st.count;
            double x0 = 1e9, x1 = -1, y0 = 1e9, y1 = -1;
            for (std::size_t y = 0; y < h; ++y) {
                for (std::size_t x = 0; x < w; ++x) {
                    if (r[y * w + x] == id) {
                        x0 = std::min(x0, x + 0.5);
                        x1 = std::max(x1, x + 0.5);
                        y0 = std::min(y0, y + 0.5);
                        y1 = std::max(y1, y + 0.5);
                    }
                }
            }
            EXPECT_GE(st.centroid.x, x0 - 1e-9);
            EXPECT_LE(st.centroid.x, x1 + 1e-9);
            EXPECT_GE(st.centroid.y, y0 - 1e-9);
            EXPECT_LE(st.centroid.y, y1 + 1e-9);
        }
        EXPECT_EQ(sum, s.total);
    }
}

TEST(SelectKeyLabels, ZeroThresholdTakesAllByCount)
{
    LabelStats s;
    s.per_label[3] = {5, {}};
    s.per_label[1] = {9, {}};
    s.per_label[2] = {5, {}};
    s.total = 19;
    EXPECT_EQ(select_key_labels(s, 0.0, 10), (std::vector<std::uint16_t>{1, 2, 3}));
    EXPECT_EQ(select_key_labels(s, 0.0, 2), (std::vector<std::uint16_t>{1, 2}));
    EXPECT_TRUE(select_key_labels(s, 0.0, 0).empty());
}

TEST(SelectKeyLabels, BelowOnePercentExcluded)
{
    // 1000 non-background pixels; label 2 holds 9 of them (0.9%), label 3 holds 10 (1%).
    std::vector<std::uint16_t> r(1000, 1);
    std::fill_n(r.begin(), 9, 2);
    std::fill_n(r.begin() + 9, 10, 3);
    const auto s = analyze_slice_labels(r, 100, 10);
    EXPECT_EQ(select_key_labels(s), (std::vector<std::uint16_t>{1, 3}));
}

TEST(Perimeter, WalkIsClockwiseFromOrigin)
{
    EXPECT_DOUBLE_EQ(perimeter_length(10, 4), 28);
    EXPECT_DOUBLE_EQ(perimeter_position({5, 0}, 10, 4), 5);
    EXPECT_DOUBLE_EQ(perimeter_position({10, 2}, 10, 4), 12);
    EXPECT_DOUBLE_EQ(perimeter_position({4, 4}, 10, 4), 20);
    EXPECT_DOUBLE_EQ(perimeter_position({0, 1}, 10, 4), 27);
    for (double s = 0; s < 28; s += 0.7) {
        EXPECT_NEAR(perimeter_position(perimeter_point(s, 10, 4), 10, 4), s, 1e-9);
    }
    EXPECT_DOUBLE_EQ(perimeter_distance(1, 27, 28), 2);
}

TEST(PlaceLabels, SingleLabelRightOfCentre)
{
    std::vector<LabelCandidate> c{{1, "a", 10, {80, 50}}};
    const auto a = place_edge_labels(c, 100, 100);
    ASSERT_EQ(a.size(), 1u);
    EXPECT_DOUBLE_EQ(a[0].anchor.x, 100);
    EXPECT_DOUBLE_EQ(a[0].anchor.y, 50);
}

TEST(PlaceLabels, RayIntersection)
{
    std::vector<LabelCandidate> c{{1, "a", 10, {60, 30}}};
    const auto a = place_edge_labels(c, 100, 80);
    ASSERT_EQ(a.size(), 1u);
    // Direction (10, -10) from (50, 40) meets y = 0 at x = 90.
    EXPECT_NEAR(a[0].anchor.x, 90, 1e-9);
    EXPECT_NEAR(a[0].anchor.y, 0, 1e-9);
}

TEST(PlaceLabels, DegenerateCentroidUsesPlusX)
{
    std::vector<LabelCandidate> c{{1, "a", 10, {32, 16}}};
    const auto a = place_edge_labels(c, 64, 32);
    EXPECT_DOUBLE_EQ(a[0].anchor.x, 64);
    EXPECT_DOUBLE_EQ(a[0].anchor.y, 16);
}

TEST(PlaceLabels, IdenticalCentroidsShiftBySeparation)
{
    std::vector<LabelCandidate> c{{1, "a", 10, {70, 20}}, {2, "b", 5, {70, 20}}};
    const auto a = place_edge_labels(c, 100, 100, 24);
    const double p = perimeter_length(100, 100);
    const double s0 = perimeter_position(a[0].anchor, 100, 100);
    const double s1 = perimeter_position(a[1].anchor, 100, 100);
    EXPECT_NEAR(std::fmod(s1 - s0 + p, p), 24.0, 1e-9);
}

TEST(PlaceLabels, TooManyLabelsThrows)
{
    std::vector<LabelCandidate> c;
    for (std::uint16_t n = 1; n <= 5; ++n) {
        c.push_back({n, "x", 1, {1, 1}});
    }
    EXPECT_THROW(place_edge_labels(c, 10, 10, 10), PlacementError);
    EXPECT_NO_THROW(place_edge_labels(c, 10, 10, 8));
}

TEST(PlaceLabels, RandomSeparationProperty)
{
    std::mt19937_64 rng(12);
    for (int n = 0; n < 200; ++n) {
        const std::uint32_t w = 16 + std::uint32_t(rng() % 300), h = 16 + std::uint32_t(rng() % 300);
        std::uniform_real_distribution<double> dx(0, w), dy(0, h);
        std::vector<LabelCandidate> c;
        for (std::uint16_t k = 1; k <= 1 + rng() % 8; ++k) {
            c.push_back({k, "s", 1, {dx(rng), dy(rng)}});
        }
        const double sep = 24;
        if (perimeter_length(w, h) < sep * double(c.size())) {
            continue;
        }
        const auto a = place_edge_labels(c, w, h, sep);
        ASSERT_EQ(a.size(), c.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            ASSERT_TRUE(on_boundary(a[i].anchor, w, h));
            for (std::size_t j = i + 1; j < a.size(); ++j) {
                ASSERT_GE(perimeter_distance(perimeter_position(a[i].anchor, w, h),
                                             perimeter_position(a[j].anchor, w, h), perimeter_length(w, h)),
                          sep - 1e-6);
            }
        }
    }
}

TEST(Pick, AlongNormalHitsCentre)
{
    const auto m = make_meta(8, 8, 8);
    const auto vol = compress_all(m, random_slices(m, 1));
    PlaneSlicer p;
    p.center = {3.5, 3.5, 3};
    p.hu = 4;
    p.hv = 4;
    p.width = 9;
    p.height = 9;
    const auto img = render_plane_slice(p, vol, nullptr, 1.0);
    const auto hit = pick_plane({{3.5, 3.5, 10}, {0, 0, -1}}, p, img);
    ASSERT_TRUE(hit);
    EXPECT_EQ(hit->world, p.center);
    EXPECT_EQ(hit->i, 4u);
    EXPECT_EQ(hit->j, 4u);
}

TEST(Pick, ParallelAndBehindMiss)
{
    PlaneSlicer p;
    p.width = 4;
    p.height = 4;
    SliceImage img;
    img.width = 4;
    img.height = 4;
    img.labels.assign(16, 0);
    img.rgba.assign(64, 0);
    img.geometry = {p.center, p.u, p.v, p.hu, p.hv, 1.0};
    EXPECT_FALSE(pick_plane({{0, 0, 1}, {1, 0, 0}}, p, img));
    EXPECT_FALSE(pick_plane({{0, 0, 1}, {0, 0, 1}}, p, img));
    EXPECT_FALSE(pick_plane({{5, 0, 1}, {0, 0, -1}}, p, img));
    EXPECT_THROW(pick_plane({{0, 0, 1}, {0, 0, 0}}, p, img), std::domain_error);
    img.geometry.hu = 2;
    EXPECT_THROW(pick_plane({{0, 0, 1}, {0, 0, -1}}, p, img), std::domain_error);
}

TEST(Pick, ExactMaxEdgeClamps)
{
    PlaneSlicer p;
    p.width = 4;
    p.height = 4;
    SliceImage img;
    img.width = 4;
    img.height = 4;
    img.labels.assign(16, 0);
    img.rgba.assign(64, 0);
    img.geometry = {p.center, p.u, p.v, p.hu, p.hv, 1.0};
    const auto hit = pick_plane({{1, -1, 1}, {0, 0, -1}}, p, img);
    ASSERT_TRUE(hit);
    EXPECT_EQ(hit->i, 3u);
    EXPECT_EQ(hit->j, 3u);
}

TEST(Pick, EveryPixelCentreOnRandomPlanesAndScales)
{
    Phantom ph = generate_phantom(sphere_spec(24, 12));
    const auto vol = compress_all(ph.color.meta(), ph.color.slices());
    std::mt19937_64 rng(77);
    for (int n = 0; n < 5; ++n) {
        const Vec3 nrm = random_unit(rng);
        const Vec3 helper = std::abs(nrm.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
        PlaneSlicer p;
        p.u = normalized(cross(helper, nrm));
        p.v = cross(nrm, p.u);
        p.center = random_point_in(vol.meta(), rng, 4);
        p.hu = 7;
        p.hv = 5;
        p.width = 21;
        p.height = 15;
        for (double s : {1.0, 0.5}) {
            const auto img = render_plane_slice(p, vol, &ph.labels, s);
            for (std::uint32_t j = 0; j < img.height; ++j) {
                for (std::uint32_t i = 0; i < img.width; ++i) {
                    const Vec3 target = plane_pixel_to_world(p, i, j, s);
                    const Vec3 origin = target + 9.0 * (p.normal() + 0.3 * p.u);
                    const auto hit = pick_plane({origin, target - origin}, p, img, vol.meta().palette);
                    ASSERT_TRUE(hit);
                    ASSERT_EQ(hit->i, i);
                    ASSERT_EQ(hit->j, j);
                    ASSERT_EQ(hit->label_id, img.label(i, j));
                    ASSERT_LE(std::abs(dot(hit->world - p.center, p.normal())), 1e-6);
                }
            }
        }
    }
}

TEST(Highlight, IdentityParameters)
{
    SliceImage s = flat_slice(4, 4, {100, 150, 200}, 3);
    HighlightParams h;
    h.selected = {3};
    h.alpha = 0.0;
    h.dim = 1.0;
    EXPECT_EQ(apply_highlight(s, h), s);
}

TEST(Highlight, FullAlphaGivesHighlightColour)
{
    SliceImage s = flat_slice(2, 2, {100, 150, 200}, 3);
    HighlightParams h;
    h.selected = {3};
    h.alpha = 1.0;
    h.color = {1, 2, 3};
    const auto out = apply_highlight(s, h);
    EXPECT_EQ(out.pixel(1, 1)[0], 1);
    EXPECT_EQ(out.pixel(1, 1)[2], 3);
    EXPECT_EQ(out.pixel(1, 1)[3], 255);
}

TEST(Highlight, HalfBlendExample)
{
    SliceImage s = flat_slice(1, 1, {100, 100, 100}, 4);
    HighlightParams h;
    h.selected = {4};
    h.alpha = 0.5;
    h.color = {255, 0, 0};
    const auto out = apply_highlight(s, h);
    EXPECT_EQ(out.pixel(0, 0)[0], 178);
    EXPECT_EQ(out.pixel(0, 0)[1], 50);
    EXPECT_EQ(out.pixel(0, 0)[2], 50);
}

TEST(Highlight, DimsContextAndSkipsTransparent)
{
    SliceImage s = flat_slice(2, 1, {100, 101, 0}, 5);
    s.pixel(1, 0)[3] = 0;
    HighlightParams h;
    h.selected = {9};
    h.dim = 0.5;
    const auto out = apply_highlight(s, h);
    EXPECT_EQ(out.pixel(0, 0)[0], 50);
    EXPECT_EQ(out.pixel(0, 0)[1], 51);
    EXPECT_EQ(out.pixel(1, 0)[0], 100);
    EXPECT_EQ(out.labels, s.labels);
}

TEST(Highlight, IdempotentAtExtremes)
{
    std::mt19937_64 rng(5);
    SliceImage s = flat_slice(8, 8, {0, 0, 0}, 0);
    for (std::size_t n = 0; n < s.labels.size(); ++n) {
        s.labels[n] = std::uint16_t(rng() % 3);
        for (int c = 0; c < 3; ++c) {
            s.rgba[4 * n + c] = std::uint8_t(rng());
        }
    }
    for (double alpha : {0.0, 1.0}) {
        HighlightParams h;
        h.selected = {1};
        h.alpha = alpha;
        const auto once = apply_highlight(s, h);
        EXPECT_EQ(apply_highlight(once, h), once);
    }
}

TEST(Highlight, ValidatesParams)
{
    HighlightParams h;
    h.alpha = 1.5;
    EXPECT_THROW(h.validate(), std::domain_error);
    h.alpha = 0.5;
    h.dim = -0.1;
    EXPECT_THROW(h.validate(), std::domain_error);
}
