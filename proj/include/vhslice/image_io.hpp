#pragma once

#include "vhslice/image.hpp"
#include "vhslice/slicer.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace vhs {

class ImageIoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RgbaImage {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<std::uint8_t> rgba;
};

std::vector<std::uint8_t> encode_png_rgba(std::uint32_t width, std::uint32_t height,
                                          const std::vector<std::uint8_t>& rgba);
RgbaImage decode_png_rgba(const std::vector<std::uint8_t>& png);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes);

/// Binary PPM (P6, maxval 255).
void write_ppm(const std::string& path, const RgbImage& img);
RgbImage read_ppm(const std::string& path);

/// Reads .ppm or .png (alpha dropped) by extension.
RgbImage read_rgb_image(const std::string& path);

/// Binary 16-bit PGM (P5, maxval 65535, big-endian samples) for label rasters.
void write_pgm16(const std::string& path, const LabelRaster& labels);
LabelRaster read_pgm16(const std::string& path);

/// Slice geometry sidecar, one `key=value` per line:
///   center=x y z / u=x y z / v=x y z / hu=.. / hv=.. / scale=.. / width=.. / height=..
std::string format_geometry_sidecar(const SliceGeometry& g, std::uint32_t width, std::uint32_t height);
SliceGeometry parse_geometry_sidecar(std::istream& in);

/// Writes `<path>` as PNG and `<path>.geom` as the sidecar.
void write_slice_png(const std::string& path, const SliceImage& slice);
/// Writes `<path>` as PPM (alpha dropped) and `<path>.geom`.
void write_slice_ppm(const std::string& path, const SliceImage& slice);

} // namespace vhs
