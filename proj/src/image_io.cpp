#include "vhslice/image_io.hpp"

#include <png.h>

#include <cctype>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <limits>
#include <sstream>

namespace vhs {

namespace {

std::string extension_of(const std::string& path)
{
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos) {
        return {};
    }
    std::string ext = path.substr(dot + 1);
    for (auto& c : ext) {
        c = char(std::tolower(static_cast<unsigned char>(c)));
    }
    return ext;
}

// Reads a PNM header: magic, width, height, maxval, then exactly one whitespace byte.
void read_pnm_header(std::istream& in, const std::string& path, const char* magic, std::uint32_t& w,
                     std::uint32_t& h, std::uint32_t& maxval)
{
    auto next_token = [&]() {
        std::string tok;
        for (;;) {
            const int c = in.peek();
            if (c == '#') {
                in.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
            } else if (std::isspace(c)) {
                in.get();
            } else {
                break;
            }
        }
        in >> tok;
        return tok;
    };
    if (next_token() != magic) {
        throw ImageIoError("'" + path + "' is not a " + magic + " image");
    }
    try {
        w = static_cast<std::uint32_t>(std::stoul(next_token()));
        h = static_cast<std::uint32_t>(std::stoul(next_token()));
        maxval = static_cast<std::uint32_t>(std::stoul(next_token()));
    } catch (const std::exception&) {
        throw ImageIoError("'" + path + "': malformed header");
    }
    in.get();
    if (!in || w == 0 || h == 0) {
        throw ImageIoError("'" + path + "': malformed header");
    }
}

std::string vec_text(const Vec3& v)
{
    std::ostringstream os;
    os << std::setprecision(17) << v.x << ' ' << v.y << ' ' << v.z;
    return os.str();
}

} // namespace

std::vector<std::uint8_t> encode_png_rgba(std::uint32_t width, std::uint32_t height,
                                          const std::vector<std::uint8_t>& rgba)
{
    if (rgba.size() != std::size_t(width) * height * 4) {
        throw ImageIoError("encode_png_rgba: buffer size does not match dimensions");
    }
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = width;
    image.height = height;
    image.format = PNG_FORMAT_RGBA;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, rgba.data(), 0, nullptr)) {
        throw ImageIoError(std::string("png encode failed: ") + image.message);
    }
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, rgba.data(), 0, nullptr)) {
        throw ImageIoError(std::string("png encode failed: ") + image.message);
    }
    out.resize(size);
    return out;
}

RgbaImage decode_png_rgba(const std::vector<std::uint8_t>& png)
{
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, png.data(), png.size())) {
        throw ImageIoError(std::string("png decode failed: ") + image.message);
    }
    image.format = PNG_FORMAT_RGBA;
    RgbaImage out;
    out.width = image.width;
    out.height = image.height;
    out.rgba.resize(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, out.rgba.data(), 0, nullptr)) {
        png_image_free(&image);
        throw ImageIoError(std::string("png decode failed: ") + image.message);
    }
    return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ImageIoError("cannot open '" + path + "'");
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes)
{
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw ImageIoError("cannot write '" + path + "'");
    }
}

void write_ppm(const std::string& path, const RgbImage& img)
{
    std::ofstream out(path, std::ios::binary);
    out << "P6\n" << img.width() << ' ' << img.height() << "\n255\n";
    static_assert(sizeof(Rgb8) == 3);
    out.write(reinterpret_cast<const char*>(img.pixels().data()), static_cast<std::streamsize>(img.pixels().size() * 3));
    if (!out) {
        throw ImageIoError("cannot write '" + path + "'");
    }
}

RgbImage read_ppm(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ImageIoError("cannot open '" + path + "'");
    }
    std::uint32_t w = 0, h = 0, maxval = 0;
    read_pnm_header(in, path, "P6", w, h, maxval);
    if (maxval != 255) {
        throw ImageIoError("'" + path + "': only 8-bit PPM is supported");
    }
    RgbImage img(w, h);
    in.read(reinterpret_cast<char*>(img.pixels().data()), static_cast<std::streamsize>(std::size_t(w) * h * 3));
    if (in.gcount() != static_cast<std::streamsize>(std::size_t(w) * h * 3)) {
        throw ImageIoError("'" + path + "': truncated pixel data");
    }
    return img;
}

RgbImage read_rgb_image(const std::string& path)
{
    const std::string ext = extension_of(path);
    if (ext == "ppm") {
        return read_ppm(path);
    }
    if (ext == "png") {
        const RgbaImage rgba = decode_png_rgba(read_file_bytes(path));
        RgbImage img(rgba.width, rgba.height);
        for (std::size_t n = 0; n < img.pixels().size(); ++n) {
            img.pixels()[n] = {rgba.rgba[n * 4], rgba.rgba[n * 4 + 1], rgba.rgba[n * 4 + 2]};
        }
        return img;
    }
    throw ImageIoError("'" + path + "': unsupported image type (expected .ppm or .png)");
}

void write_pgm16(const std::string& path, const LabelRaster& labels)
{
    std::ofstream out(path, std::ios::binary);
    out << "P5\n" << labels.width << ' ' << labels.height << "\n65535\n";
    std::vector<std::uint8_t> bytes(labels.ids.size() * 2);
    for (std::size_t n = 0; n < labels.ids.size(); ++n) {
        bytes[2 * n] = static_cast<std::uint8_t>(labels.ids[n] >> 8);
        bytes[2 * n + 1] = static_cast<std::uint8_t>(labels.ids[n] & 0xFF);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw ImageIoError("cannot write '" + path + "'");
    }
}

LabelRaster read_pgm16(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ImageIoError("cannot open '" + path + "'");
    }
    std::uint32_t w = 0, h = 0, maxval = 0;
    read_pnm_header(in, path, "P5", w, h, maxval);
    if (maxval != 65535) {
        throw ImageIoError("'" + path + "': expected a 16-bit PGM");
    }
    std::vector<std::uint8_t> bytes(std::size_t(w) * h * 2);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
        throw ImageIoError("'" + path + "': truncated pixel data");
    }
    LabelRaster out(w, h);
    for (std::size_t n = 0; n < out.ids.size(); ++n) {
        out.ids[n] = static_cast<std::uint16_t>((bytes[2 * n] << 8) | bytes[2 * n + 1]);
    }
    return out;
}

std::string format_geometry_sidecar(const SliceGeometry& g, std::uint32_t width, std::uint32_t height)
{
    std::ostringstream os;
    os << std::setprecision(17);
    os << "center=" << vec_text(g.center) << '\n';
    os << "u=" << vec_text(g.u) << '\n';
    os << "v=" << vec_text(g.v) << '\n';
    os << "hu=" << g.hu << '\n';
    os << "hv=" << g.hv << '\n';
    os << "scale=" << g.scale << '\n';
    os << "width=" << width << '\n';
    os << "height=" << height << '\n';
    return os.str();
}

SliceGeometry parse_geometry_sidecar(std::istream& in)
{
    SliceGeometry g;
    std::string line;
    auto vec = [](const std::string& v) {
        std::istringstream is(v);
        Vec3 out;
        if (!(is >> out.x >> out.y >> out.z)) {
            throw ImageIoError("geometry sidecar: bad vector '" + v + "'");
        }
        return out;
    };
    auto num = [](const std::string& v) {
        try {
            return std::stod(v);
        } catch (const std::exception&) {
            throw ImageIoError("geometry sidecar: bad number '" + v + "'");
        }
    };
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            continue;
        }
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "center") {
            g.center = vec(value);
        } else if (key == "u") {
            g.u = vec(value);
        } else if (key == "v") {
            g.v = vec(value);
        } else if (key == "hu") {
            g.hu = num(value);
        } else if (key == "hv") {
            g.hv = num(value);
        } else if (key == "scale") {
            g.scale = num(value);
        }
    }
    return g;
}

void write_slice_png(const std::string& path, const SliceImage& slice)
{
    write_file_bytes(path, encode_png_rgba(slice.width, slice.height, slice.rgba));
    const std::string side = format_geometry_sidecar(slice.geometry, slice.width, slice.height);
    write_file_bytes(path + ".geom", std::vector<std::uint8_t>(side.begin(), side.end()));
}

void write_slice_ppm(const std::string& path, const SliceImage& slice)
{
    RgbImage img(slice.width, slice.height);
    for (std::size_t n = 0; n < img.pixels().size(); ++n) {
        img.pixels()[n] = {slice.rgba[n * 4], slice.rgba[n * 4 + 1], slice.rgba[n * 4 + 2]};
    }
    write_ppm(path, img);
    const std::string side = format_geometry_sidecar(slice.geometry, slice.width, slice.height);
    write_file_bytes(path + ".geom", std::vector<std::uint8_t>(side.begin(), side.end()));
}

} // namespace vhs
