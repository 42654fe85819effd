#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace vhs {

struct Rgb8 {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    constexpr bool operator==(const Rgb8&) const = default;
};

/// Row-major RGB888 raster.
class RgbImage {
public:
    RgbImage() = default;
    RgbImage(std::size_t width, std::size_t height, Rgb8 fill = {})
        : width_(width), height_(height), pixels_(width * height, fill)
    {
    }

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    bool empty() const { return pixels_.empty(); }

    Rgb8& at(std::size_t x, std::size_t y) { return pixels_[y * width_ + x]; }
    const Rgb8& at(std::size_t x, std::size_t y) const { return pixels_[y * width_ + x]; }

    std::vector<Rgb8>& pixels() { return pixels_; }
    const std::vector<Rgb8>& pixels() const { return pixels_; }

    bool operator==(const RgbImage&) const = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<Rgb8> pixels_;
};

/// Row-major raster of label IDs.
struct LabelRaster {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint16_t> ids;

    LabelRaster() = default;
    LabelRaster(std::size_t w, std::size_t h, std::uint16_t fill = 0) : width(w), height(h), ids(w * h, fill) {}

    std::uint16_t& at(std::size_t x, std::size_t y) { return ids[y * width + x]; }
    std::uint16_t at(std::size_t x, std::size_t y) const { return ids[y * width + x]; }

    bool operator==(const LabelRaster&) const = default;
};

} // namespace vhs
