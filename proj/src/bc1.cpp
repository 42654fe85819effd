#include "vhslice/bc1.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>

namespace vhs {

namespace {

int dist2(Rgb8 a, Rgb8 b)
{
    const int dr = int(a.r) - int(b.r);
    const int dg = int(a.g) - int(b.g);
    const int db = int(a.b) - int(b.b);
    return dr * dr + dg * dg + db * db;
}

void put_u16(Bc1Block& b, std::size_t at, std::uint16_t v)
{
    b[at] = static_cast<std::uint8_t>(v & 0xFF);
    b[at + 1] = static_cast<std::uint8_t>(v >> 8);
}

// Palette entry `index` of a block, computed alone.
Rgb8 palette_entry(std::uint16_t c0, std::uint16_t c1, unsigned index)
{
    const Rgb8 e0 = expand_565(c0);
    if (index == 0) {
        return e0;
    }
    const Rgb8 e1 = expand_565(c1);
    if (index == 1) {
        return e1;
    }
    auto mix = [](int a, int b, int wa, int wb, int den) {
        return static_cast<std::uint8_t>((wa * a + wb * b) / den);
    };
    if (c0 > c1) {
        if (index == 2) {
            return {mix(e0.r, e1.r, 2, 1, 3), mix(e0.g, e1.g, 2, 1, 3), mix(e0.b, e1.b, 2, 1, 3)};
        }
        return {mix(e0.r, e1.r, 1, 2, 3), mix(e0.g, e1.g, 1, 2, 3), mix(e0.b, e1.b, 1, 2, 3)};
    }
    if (index == 2) {
        return {mix(e0.r, e1.r, 1, 1, 2), mix(e0.g, e1.g, 1, 1, 2), mix(e0.b, e1.b, 1, 1, 2)};
    }
    return {0, 0, 0};
}

} // namespace

Rgb8 expand_565(std::uint16_t c)
{
    const unsigned r5 = (c >> 11) & 0x1F;
    const unsigned g6 = (c >> 5) & 0x3F;
    const unsigned b5 = c & 0x1F;
    return {static_cast<std::uint8_t>((r5 << 3) | (r5 >> 2)),
            static_cast<std::uint8_t>((g6 << 2) | (g6 >> 4)),
            static_cast<std::uint8_t>((b5 << 3) | (b5 >> 2))};
}

std::uint16_t quantize_565(Rgb8 c)
{
    const unsigned r5 = (unsigned(c.r) * 31 + 127) / 255;
    const unsigned g6 = (unsigned(c.g) * 63 + 127) / 255;
    const unsigned b5 = (unsigned(c.b) * 31 + 127) / 255;
    return static_cast<std::uint16_t>((r5 << 11) | (g6 << 5) | b5);
}

std::uint16_t block_color0(const Bc1Block& b) { return static_cast<std::uint16_t>(b[0] | (b[1] << 8)); }
std::uint16_t block_color1(const Bc1Block& b) { return static_cast<std::uint16_t>(b[2] | (b[3] << 8)); }

std::uint32_t block_indices(const Bc1Block& b)
{
    return std::uint32_t(b[4]) | (std::uint32_t(b[5]) << 8) | (std::uint32_t(b[6]) << 16) |
           (std::uint32_t(b[7]) << 24);
}

std::array<Rgb8, 4> bc1_palette(std::uint16_t c0, std::uint16_t c1)
{
    return {palette_entry(c0, c1, 0), palette_entry(c0, c1, 1), palette_entry(c0, c1, 2),
            palette_entry(c0, c1, 3)};
}

TexelBlock bc1_decode_block(const Bc1Block& b)
{
    const auto palette = bc1_palette(block_color0(b), block_color1(b));
    const std::uint32_t idx = block_indices(b);
    TexelBlock out;
    for (unsigned t = 0; t < 16; ++t) {
        out[t] = palette[(idx >> (2 * t)) & 0x3];
    }
    return out;
}

Bc1Block bc1_encode_block(const TexelBlock& texels)
{
    std::size_t best_a = 0;
    std::size_t best_b = 1;
    int best_d = -1;
    for (std::size_t a = 0; a < 16; ++a) {
        for (std::size_t b = a + 1; b < 16; ++b) {
            const int d = dist2(texels[a], texels[b]);
            if (d > best_d) {
                best_d = d;
                best_a = a;
                best_b = b;
            }
        }
    }

    std::uint16_t c0 = quantize_565(texels[best_a]);
    std::uint16_t c1 = quantize_565(texels[best_b]);

    Bc1Block out{};
    if (c0 == c1) {
        put_u16(out, 0, c0);
        put_u16(out, 2, c1);
        return out;
    }
    if (c0 < c1) {
        std::swap(c0, c1);
    }
    put_u16(out, 0, c0);
    put_u16(out, 2, c1);

    const auto palette = bc1_palette(c0, c1);
    std::uint32_t indices = 0;
    for (unsigned t = 0; t < 16; ++t) {
        unsigned best = 0;
        int best_err = dist2(texels[t], palette[0]);
        for (unsigned p = 1; p < 4; ++p) {
            const int err = dist2(texels[t], palette[p]);
            if (err < best_err) {
                best_err = err;
                best = p;
            }
        }
        indices |= std::uint32_t(best) << (2 * t);
    }
    for (unsigned i = 0; i < 4; ++i) {
        out[4 + i] = static_cast<std::uint8_t>((indices >> (8 * i)) & 0xFF);
    }
    return out;
}

Bc1Block bc1_encode_block(std::span<const Rgb8> texels)
{
    if (texels.size() != 16) {
        throw std::domain_error("bc1_encode_block: expected 16 texels, got " + std::to_string(texels.size()));
    }
    TexelBlock block;
    std::copy(texels.begin(), texels.end(), block.begin());
    return bc1_encode_block(block);
}

CompressedSlice::CompressedSlice(std::size_t width, std::size_t height, std::vector<Bc1Block> blocks)
    : width_(width), height_(height), blocks_(std::move(blocks))
{
    if (width == 0 || height == 0) {
        throw std::domain_error("CompressedSlice: zero dimension");
    }
    if (blocks_.size() != blocks_x() * blocks_y()) {
        throw std::domain_error("CompressedSlice: block count does not match dimensions");
    }
}

Rgb8 CompressedSlice::decode_texel(std::size_t x, std::size_t y) const
{
    if (x >= width_ || y >= height_) {
        throw std::domain_error("decode_texel: (" + std::to_string(x) + ", " + std::to_string(y) +
                                ") outside " + std::to_string(width_) + "x" + std::to_string(height_));
    }
    return decode_texel_unchecked(x, y);
}

Rgb8 CompressedSlice::decode_texel_unchecked(std::size_t x, std::size_t y) const
{
    const Bc1Block& b = blocks_[(y >> 2) * blocks_x() + (x >> 2)];
    const unsigned t = unsigned((y & 3) * 4 + (x & 3));
    const unsigned index = (block_indices(b) >> (2 * t)) & 0x3;
    return palette_entry(block_color0(b), block_color1(b), index);
}

RgbImage CompressedSlice::decompress() const
{
    RgbImage img(width_, height_);
    for (std::size_t by = 0; by < blocks_y(); ++by) {
        for (std::size_t bx = 0; bx < blocks_x(); ++bx) {
            const TexelBlock texels = bc1_decode_block(blocks_[by * blocks_x() + bx]);
            for (std::size_t ty = 0; ty < 4; ++ty) {
                for (std::size_t tx = 0; tx < 4; ++tx) {
                    const std::size_t x = bx * 4 + tx;
                    const std::size_t y = by * 4 + ty;
                    if (x < width_ && y < height_) {
                        img.at(x, y) = texels[ty * 4 + tx];
                    }
                }
            }
        }
    }
    return img;
}

std::size_t compressed_slice_bytes(std::size_t width, std::size_t height)
{
    return ((width + 3) / 4) * ((height + 3) / 4) * sizeof(Bc1Block);
}

CompressedSlice compress_slice(const RgbImage& img)
{
    if (img.empty()) {
        throw std::domain_error("compress_slice: empty image");
    }
    const std::size_t bw = (img.width() + 3) / 4;
    const std::size_t bh = (img.height() + 3) / 4;
    std::vector<Bc1Block> blocks(bw * bh);
    for (std::size_t by = 0; by < bh; ++by) {
        for (std::size_t bx = 0; bx < bw; ++bx) {
            TexelBlock texels;
            for (std::size_t ty = 0; ty < 4; ++ty) {
                for (std::size_t tx = 0; tx < 4; ++tx) {
                    const std::size_t x = std::min(bx * 4 + tx, img.width() - 1);
                    const std::size_t y = std::min(by * 4 + ty, img.height() - 1);
                    texels[ty * 4 + tx] = img.at(x, y);
                }
            }
            blocks[by * bw + bx] = bc1_encode_block(texels);
        }
    }
    return CompressedSlice(img.width(), img.height(), std::move(blocks));
}

} // namespace vhs
