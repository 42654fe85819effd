#pragma once

// BC1 (DXT1) block compression, opaque 4-colour mode only.
//
// Block layout (8 bytes, little-endian):
//   bytes 0-1  c0 as RGB565
//   bytes 2-3  c1 as RGB565
//   bytes 4-7  sixteen 2-bit palette indices, texel 0 (top-left, row-major) in the low bits

#include "vhslice/image.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace vhs {

using Bc1Block = std::array<std::uint8_t, 8>;
using TexelBlock = std::array<Rgb8, 16>;

Rgb8 expand_565(std::uint16_t c);

/// Nearest RGB565 value per channel.
std::uint16_t quantize_565(Rgb8 c);

std::uint16_t block_color0(const Bc1Block& b);
std::uint16_t block_color1(const Bc1Block& b);
std::uint32_t block_indices(const Bc1Block& b);

/// The four palette colours implied by a block's endpoints.
std::array<Rgb8, 4> bc1_palette(std::uint16_t c0, std::uint16_t c1);

TexelBlock bc1_decode_block(const Bc1Block& b);

/// Deterministic extremal-pair encoder. Always emits 4-colour mode (c0 > c1)
/// unless both endpoints quantize to the same value.
Bc1Block bc1_encode_block(const TexelBlock& texels);

/// Span overload; throws std::domain_error unless exactly 16 texels are given.
Bc1Block bc1_encode_block(std::span<const Rgb8> texels);

/// A BC1-compressed 2D raster with random texel access.
class CompressedSlice {
public:
    CompressedSlice() = default;
    CompressedSlice(std::size_t width, std::size_t height, std::vector<Bc1Block> blocks);

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    std::size_t blocks_x() const { return (width_ + 3) / 4; }
    std::size_t blocks_y() const { return (height_ + 3) / 4; }
    const std::vector<Bc1Block>& blocks() const { return blocks_; }
    std::size_t payload_bytes() const { return blocks_.size() * sizeof(Bc1Block); }

    /// Decodes a single texel without touching the rest of its block's palette.
    /// Throws std::domain_error when (x, y) is outside the raster.
    Rgb8 decode_texel(std::size_t x, std::size_t y) const;

    /// Unchecked variant for hot loops that already validated coordinates.
    Rgb8 decode_texel_unchecked(std::size_t x, std::size_t y) const;

    RgbImage decompress() const;

    bool operator==(const CompressedSlice&) const = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<Bc1Block> blocks_;
};

std::size_t compressed_slice_bytes(std::size_t width, std::size_t height);

/// Edge blocks are padded by clamping to the last row/column.
CompressedSlice compress_slice(const RgbImage& img);

} // namespace vhs
