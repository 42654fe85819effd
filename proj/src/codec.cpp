#include "vhslice/codec.hpp"

#include <algorithm>
#include <cstdlib>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace vhs {

RgbImage downsample_slice(const RgbImage& img, std::uint32_t factor)
{
    if (factor == 0) {
        throw std::domain_error("downsample_slice: factor must be >= 1");
    }
    if (factor == 1) {
        return img;
    }
    const std::size_t ow = (img.width() + factor - 1) / factor;
    const std::size_t oh = (img.height() + factor - 1) / factor;
    RgbImage out(ow, oh);
    for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
            const std::size_t x0 = ox * factor;
            const std::size_t y0 = oy * factor;
            const std::size_t x1 = std::min<std::size_t>(x0 + factor, img.width());
            const std::size_t y1 = std::min<std::size_t>(y0 + factor, img.height());
            std::uint64_t sr = 0, sg = 0, sb = 0;
            for (std::size_t y = y0; y < y1; ++y) {
                for (std::size_t x = x0; x < x1; ++x) {
                    const Rgb8 c = img.at(x, y);
                    sr += c.r;
                    sg += c.g;
                    sb += c.b;
                }
            }
            const std::uint64_t n = (x1 - x0) * (y1 - y0);
            out.at(ox, oy) = {static_cast<std::uint8_t>((sr + n / 2) / n), static_cast<std::uint8_t>((sg + n / 2) / n),
                              static_cast<std::uint8_t>((sb + n / 2) / n)};
        }
    }
    return out;
}

LabelRaster downsample_labels_nearest(const LabelRaster& labels, std::uint32_t factor)
{
    if (factor == 0) {
        throw std::domain_error("downsample_labels_nearest: factor must be >= 1");
    }
    const std::size_t ow = (labels.width + factor - 1) / factor;
    const std::size_t oh = (labels.height + factor - 1) / factor;
    LabelRaster out(ow, oh);
    for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
            const std::size_t x = std::min<std::size_t>(ox * factor + factor / 2, labels.width - 1);
            const std::size_t y = std::min<std::size_t>(oy * factor + factor / 2, labels.height - 1);
            out.at(ox, oy) = labels.at(x, y);
        }
    }
    return out;
}

LabelVolume downsample_label_volume(const LabelVolume& labels, std::uint32_t factor)
{
    const VolumeMeta& in = labels.meta();
    const VolumeMeta meta = downsampled_meta(in, factor);
    std::vector<std::uint16_t> out;
    out.reserve(meta.voxel_count());
    const std::size_t plane = std::size_t(in.nx) * in.ny;
    for (std::uint32_t k = 0; k < in.nz; ++k) {
        LabelRaster r(in.nx, in.ny);
        std::copy_n(labels.voxels().begin() + std::ptrdiff_t(k * plane), plane, r.ids.begin());
        const LabelRaster small = downsample_labels_nearest(r, factor);
        out.insert(out.end(), small.ids.begin(), small.ids.end());
    }
    return LabelVolume(meta, std::move(out));
}

LabelRaster map_colors_to_labels(const RgbImage& img, const ColorKeyTable& table)
{
    LabelRaster out(img.width(), img.height());
    for (std::size_t n = 0; n < img.pixels().size(); ++n) {
        const Rgb8 c = img.pixels()[n];
        for (const auto& e : table.entries) {
            if (std::abs(int(c.r) - int(e.key.r)) <= e.tolerance[0] &&
                std::abs(int(c.g) - int(e.key.g)) <= e.tolerance[1] &&
                std::abs(int(c.b) - int(e.key.b)) <= e.tolerance[2]) {
                out.ids[n] = e.label_id;
                break;
            }
        }
    }
    return out;
}

VolumeMeta downsampled_meta(const VolumeMeta& meta, std::uint32_t factor)
{
    if (factor == 0) {
        throw std::domain_error("downsampled_meta: factor must be >= 1");
    }
    VolumeMeta out = meta;
    out.nx = (meta.nx + factor - 1) / factor;
    out.ny = (meta.ny + factor - 1) / factor;
    out.sx = meta.sx * factor;
    out.sy = meta.sy * factor;
    out.origin.x = meta.origin.x + 0.5 * double(factor - 1) * meta.sx;
    out.origin.y = meta.origin.y + 0.5 * double(factor - 1) * meta.sy;
    return out;
}

CompressionResult compress_volume(const RawColorVolume& stack, std::uint32_t factor,
                                  const std::optional<ColorKeyTable>& table)
{
    if (factor == 0) {
        throw std::domain_error("compress_volume: factor must be >= 1");
    }
    const VolumeMeta& in_meta = stack.meta();
    for (const auto& s : stack.slices()) {
        if (s.width() != in_meta.nx || s.height() != in_meta.ny) {
            throw std::domain_error("compress_volume: slice dimensions differ");
        }
    }
    if (table) {
        for (const auto& e : table->entries) {
            if (e.label_id != 0 && in_meta.find_label(e.label_id) == nullptr) {
                throw std::domain_error("compress_volume: colour key label " + std::to_string(e.label_id) +
                                        " has no palette entry");
            }
            if (e.tolerance[0] < 0 || e.tolerance[1] < 0 || e.tolerance[2] < 0) {
                throw std::domain_error("compress_volume: negative colour key tolerance");
            }
        }
    }

    const VolumeMeta meta = downsampled_meta(in_meta, factor);
    std::vector<CompressedSlice> slices;
    slices.reserve(meta.nz);
    std::vector<std::uint16_t> labels;
    if (table) {
        labels.reserve(meta.voxel_count());
    }
    for (const auto& s : stack.slices()) {
        const RgbImage small = downsample_slice(s, factor);
        if (table) {
            const LabelRaster lr = map_colors_to_labels(small, *table);
            labels.insert(labels.end(), lr.ids.begin(), lr.ids.end());
        }
        slices.push_back(compress_slice(small));
    }

    CompressionResult result{ColorVolume(meta, std::move(slices)), std::nullopt};
    if (table) {
        result.labels.emplace(meta, std::move(labels));
    }
    return result;
}

ColorKeyFile parse_color_keys(std::istream& in)
{
    ColorKeyFile out;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        std::istringstream ls(hash == std::string::npos ? raw : raw.substr(0, hash));
        long id = 0, r = 0, g = 0, b = 0, tol = 0;
        if (!(ls >> id)) {
            continue;
        }
        if (!(ls >> r >> g >> b >> tol)) {
            throw std::domain_error("colour keys line " + std::to_string(line_no) +
                                    ": expected <id> <r> <g> <b> <tolerance> <name>");
        }
        std::string name;
        std::getline(ls, name);
        const auto first = name.find_first_not_of(" \t");
        name = first == std::string::npos ? "" : name.substr(first);
        while (!name.empty() && (name.back() == ' ' || name.back() == '\r' || name.back() == '\t')) {
            name.pop_back();
        }
        if (id < 1 || id > 65535 || r < 0 || r > 255 || g < 0 || g > 255 || b < 0 || b > 255 || tol < 0 ||
            name.empty()) {
            throw std::domain_error("colour keys line " + std::to_string(line_no) + ": value out of range");
        }
        const Rgb8 key{std::uint8_t(r), std::uint8_t(g), std::uint8_t(b)};
        const int t = int(std::min<long>(tol, 255));
        out.table.entries.push_back({std::uint16_t(id), key, {t, t, t}});
        const bool known = std::any_of(out.palette.begin(), out.palette.end(),
                                       [&](const auto& p) { return p.id == id; });
        if (!known) {
            out.palette.push_back({std::uint16_t(id), name, key});
        }
    }
    return out;
}

} // namespace vhs
