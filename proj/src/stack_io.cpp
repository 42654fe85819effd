#include "vhslice/stack_io.hpp"

#include "vhslice/image_io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace vhs {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double to_number(const std::string& text, const std::string& what)
{
    std::istringstream is(text);
    double v = 0.0;
    if (!(is >> v) || !(is >> std::ws).eof()) {
        throw InputError("manifest: bad value for " + what + ": '" + text + "'");
    }
    return v;
}

std::string slice_name(std::size_t k, const char* ext)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "slice_%04zu.%s", k, ext);
    return buf;
}

std::vector<fs::path> files_with(const fs::path& dir, std::initializer_list<const char*> exts)
{
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) {
            continue;
        }
        std::string ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return char(std::tolower(c)); });
        if (std::find(exts.begin(), exts.end(), ext) != exts.end()) {
            out.push_back(e.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

SliceManifest parse_manifest(std::istream& in)
{
    SliceManifest m;
    bool in_table = false;
    bool have_sx = false;
    bool have_sy = false;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) {
            continue;
        }
        if (in_table) {
            m.z_table.push_back(to_number(line, "z_table entry"));
            continue;
        }
        if (line == "z_table:") {
            in_table = true;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InputError("manifest: expected key=value, got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "sx") {
            m.sx = to_number(value, key);
            have_sx = true;
        } else if (key == "sy") {
            m.sy = to_number(value, key);
            have_sy = true;
        } else if (key == "origin") {
            std::istringstream is(value);
            if (!(is >> m.origin.x >> m.origin.y >> m.origin.z)) {
                throw InputError("manifest: bad value for origin: '" + value + "'");
            }
        } else {
            throw InputError("manifest: unknown key '" + key + "'");
        }
    }
    if (!have_sx || !have_sy) {
        throw InputError("manifest: sx and sy are required");
    }
    if (m.z_table.empty()) {
        throw InputError("manifest: z_table is empty");
    }
    return m;
}

std::string format_manifest(const SliceManifest& m)
{
    std::ostringstream os;
    os << std::setprecision(17);
    os << "sx=" << m.sx << "\nsy=" << m.sy << "\norigin=" << m.origin.x << ' ' << m.origin.y << ' ' << m.origin.z
       << "\nz_table:\n";
    for (const double z : m.z_table) {
        os << z << '\n';
    }
    return os.str();
}

std::vector<PaletteEntry> parse_palette(std::istream& in)
{
    std::vector<PaletteEntry> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) {
            continue;
        }
        std::istringstream is(line);
        unsigned id = 0, r = 0, g = 0, b = 0;
        std::string name;
        if (!(is >> id >> r >> g >> b) || id == 0 || id > 65535 || r > 255 || g > 255 || b > 255) {
            throw InputError("palette line " + std::to_string(line_no) + ": expected <id> <r> <g> <b> <name>");
        }
        std::getline(is >> std::ws, name);
        if (name.empty()) {
            throw InputError("palette line " + std::to_string(line_no) + ": missing name");
        }
        out.push_back({static_cast<std::uint16_t>(id), trim(name),
                       {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)}});
    }
    return out;
}

std::string format_palette(const std::vector<PaletteEntry>& palette)
{
    std::ostringstream os;
    for (const auto& e : palette) {
        os << e.id << ' ' << int(e.color.r) << ' ' << int(e.color.g) << ' ' << int(e.color.b) << ' ' << e.name << '\n';
    }
    return os.str();
}

void write_slice_stack(const std::string& dir, const RawColorVolume& color, const LabelVolume* labels)
{
    const VolumeMeta& meta = color.meta();
    fs::create_directories(dir);
    for (std::uint32_t k = 0; k < meta.nz; ++k) {
        write_ppm((fs::path(dir) / slice_name(k, "ppm")).string(), color.slices()[k]);
    }
    const std::string manifest = format_manifest({meta.sx, meta.sy, meta.origin, meta.z_table});
    write_file_bytes((fs::path(dir) / kManifestName).string(), {manifest.begin(), manifest.end()});
    const std::string palette = format_palette(meta.palette);
    write_file_bytes((fs::path(dir) / kPaletteName).string(), {palette.begin(), palette.end()});
    if (labels == nullptr) {
        return;
    }
    const fs::path ldir = fs::path(dir) / kLabelDirName;
    fs::create_directories(ldir);
    for (std::uint32_t k = 0; k < meta.nz; ++k) {
        LabelRaster r(meta.nx, meta.ny);
        for (std::uint32_t j = 0; j < meta.ny; ++j) {
            for (std::uint32_t i = 0; i < meta.nx; ++i) {
                r.ids[std::size_t(j) * meta.nx + i] = labels->voxel(i, j, k);
            }
        }
        write_pgm16((ldir / slice_name(k, "pgm")).string(), r);
    }
}

SliceStack read_slice_stack(const std::string& dir, bool with_labels)
{
    if (!fs::is_directory(dir)) {
        throw InputError("'" + dir + "' is not a directory");
    }
    const fs::path manifest_path = fs::path(dir) / kManifestName;
    std::ifstream mf(manifest_path);
    if (!mf) {
        throw InputError("missing manifest '" + manifest_path.string() + "'");
    }
    const SliceManifest manifest = parse_manifest(mf);

    VolumeMeta meta;
    meta.sx = manifest.sx;
    meta.sy = manifest.sy;
    meta.origin = manifest.origin;
    meta.z_table = manifest.z_table;
    const fs::path palette_path = fs::path(dir) / kPaletteName;
    if (fs::exists(palette_path)) {
        std::ifstream pf(palette_path);
        meta.palette = parse_palette(pf);
    }

    const auto images = files_with(dir, {".ppm", ".png"});
    if (images.size() != manifest.z_table.size()) {
        throw InputError("'" + dir + "' has " + std::to_string(images.size()) + " slice images but the manifest lists " +
                         std::to_string(manifest.z_table.size()) + " z positions");
    }
    std::vector<RgbImage> slices;
    slices.reserve(images.size());
    for (const auto& path : images) {
        RgbImage img = read_rgb_image(path.string());
        if (!slices.empty() && (img.width() != slices.front().width() || img.height() != slices.front().height())) {
            throw InputError("'" + path.string() + "' is " + std::to_string(img.width()) + "x" +
                             std::to_string(img.height()) + ", expected " + std::to_string(slices.front().width()) +
                             "x" + std::to_string(slices.front().height()));
        }
        slices.push_back(std::move(img));
    }
    meta.nx = slices.front().width();
    meta.ny = slices.front().height();
    meta.nz = static_cast<std::uint32_t>(slices.size());
    meta.validate();

    SliceStack out{RawColorVolume(meta, std::move(slices)), std::nullopt};
    if (!with_labels) {
        return out;
    }
    const auto label_files = files_with(fs::path(dir) / kLabelDirName, {".pgm"});
    if (label_files.size() != meta.nz) {
        throw InputError("'" + (fs::path(dir) / kLabelDirName).string() + "' has " +
                         std::to_string(label_files.size()) + " label rasters, expected " + std::to_string(meta.nz));
    }
    std::vector<std::uint16_t> voxels;
    voxels.reserve(meta.voxel_count());
    for (const auto& path : label_files) {
        const LabelRaster r = read_pgm16(path.string());
        if (r.width != meta.nx || r.height != meta.ny) {
            throw InputError("'" + path.string() + "' does not match the slice dimensions");
        }
        voxels.insert(voxels.end(), r.ids.begin(), r.ids.end());
    }
    out.labels.emplace(meta, std::move(voxels));
    return out;
}

} // namespace vhs
