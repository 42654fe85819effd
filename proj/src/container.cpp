#include "vhslice/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace vhs {

namespace {

class Writer {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v)
    {
        u8(std::uint8_t(v & 0xFF));
        u8(std::uint8_t(v >> 8));
    }
    void u32(std::uint32_t v)
    {
        for (int i = 0; i < 4; ++i) {
            u8(std::uint8_t((v >> (8 * i)) & 0xFF));
        }
    }
    void f32(double v) { u32(std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
    void bytes(const void* p, std::size_t n)
    {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out_.insert(out_.end(), b, b + n);
    }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}

    void need(std::size_t n, const char* what) const
    {
        if (in_.size() - pos_ < n) {
            throw FormatError(std::string("VHS1: truncated while reading ") + what);
        }
    }
    std::uint8_t u8(const char* what)
    {
        need(1, what);
        return in_[pos_++];
    }
    std::uint16_t u16(const char* what)
    {
        need(2, what);
        const std::uint16_t v = std::uint16_t(in_[pos_] | (in_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }
    std::uint32_t u32(const char* what)
    {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= std::uint32_t(in_[pos_ + i]) << (8 * i);
        }
        pos_ += 4;
        return v;
    }
    double f32(const char* what) { return std::bit_cast<float>(u32(what)); }
    const std::uint8_t* take(std::size_t n, const char* what)
    {
        need(n, what);
        const std::uint8_t* p = in_.data() + pos_;
        pos_ += n;
        return p;
    }
    bool at_end() const { return pos_ == in_.size(); }

private:
    const std::vector<std::uint8_t>& in_;
    std::size_t pos_ = 0;
};

} // namespace

VolumeMeta round_trip_meta(const VolumeMeta& meta)
{
    // Narrowed through a buffer: GCC 11 at -O3 otherwise drops the float round trip for sx/sy.
    std::vector<float> narrow{float(meta.sx), float(meta.sy), float(meta.origin.x), float(meta.origin.y),
                              float(meta.origin.z)};
    for (double z : meta.z_table) {
        narrow.push_back(float(z));
    }
    VolumeMeta out = meta;
    out.sx = narrow[0];
    out.sy = narrow[1];
    out.origin = {narrow[2], narrow[3], narrow[4]};
    for (std::size_t k = 0; k < out.z_table.size(); ++k) {
        out.z_table[k] = narrow[5 + k];
    }
    return out;
}

std::vector<std::uint8_t> encode_vhs1(const ColorVolume& color, const LabelVolume* labels)
{
    const VolumeMeta& m = color.meta();
    if (labels != nullptr && !(labels->meta() == m)) {
        throw std::domain_error("encode_vhs1: label volume meta differs from colour volume meta");
    }
    Writer w;
    w.bytes(kVhs1Magic, 4);
    w.u32(kVhs1Version);
    w.u32(m.nx);
    w.u32(m.ny);
    w.u32(m.nz);
    w.f32(m.sx);
    w.f32(m.sy);
    for (double z : m.z_table) {
        w.f32(z);
    }
    w.f32(m.origin.x);
    w.f32(m.origin.y);
    w.f32(m.origin.z);
    w.u32(static_cast<std::uint32_t>(m.palette.size()));
    for (const auto& e : m.palette) {
        if (e.name.size() > 0xFFFF) {
            throw std::domain_error("encode_vhs1: palette name too long");
        }
        w.u16(e.id);
        w.u16(static_cast<std::uint16_t>(e.name.size()));
        w.bytes(e.name.data(), e.name.size());
        w.u8(e.color.r);
        w.u8(e.color.g);
        w.u8(e.color.b);
    }
    w.u8(labels != nullptr ? 1 : 0);
    for (const auto& s : color.slices()) {
        for (const auto& b : s.blocks()) {
            w.bytes(b.data(), b.size());
        }
    }
    if (labels != nullptr) {
        const auto& v = labels->voxels();
        const std::size_t plane = std::size_t(m.nx) * m.ny;
        for (std::size_t k = 0; k < m.nz; ++k) {
            const std::size_t begin = k * plane;
            std::size_t n = begin;
            while (n < begin + plane) {
                const std::uint16_t id = v[n];
                std::size_t run = 1;
                while (n + run < begin + plane && v[n + run] == id && run < 0xFFFFFFFFu) {
                    ++run;
                }
                w.u32(static_cast<std::uint32_t>(run));
                w.u16(id);
                n += run;
            }
            w.u32(0);
            w.u16(0);
        }
    }
    return w.take();
}

VolumeFile decode_vhs1(const std::vector<std::uint8_t>& bytes)
{
    Reader r(bytes);
    const std::uint8_t* magic = r.take(4, "magic");
    if (std::memcmp(magic, kVhs1Magic, 4) != 0) {
        throw FormatError("not a VHS1 file");
    }
    const std::uint32_t version = r.u32("version");
    if (version != kVhs1Version) {
        throw FormatError("unsupported VHS1 version " + std::to_string(version));
    }
    VolumeMeta m;
    m.nx = r.u32("nx");
    m.ny = r.u32("ny");
    m.nz = r.u32("nz");
    if (m.nx == 0 || m.ny == 0 || m.nz == 0) {
        throw FormatError("VHS1: zero dimension");
    }
    m.sx = r.f32("sx");
    m.sy = r.f32("sy");
    r.need(std::size_t(m.nz) * 4, "z_table");
    m.z_table.resize(m.nz);
    for (auto& z : m.z_table) {
        z = r.f32("z_table");
    }
    m.origin.x = r.f32("origin");
    m.origin.y = r.f32("origin");
    m.origin.z = r.f32("origin");
    const std::uint32_t palette_count = r.u32("palette count");
    for (std::uint32_t n = 0; n < palette_count; ++n) {
        PaletteEntry e;
        e.id = r.u16("palette id");
        const std::uint16_t len = r.u16("palette name length");
        const std::uint8_t* name = r.take(len, "palette name");
        e.name.assign(reinterpret_cast<const char*>(name), len);
        e.color.r = r.u8("palette colour");
        e.color.g = r.u8("palette colour");
        e.color.b = r.u8("palette colour");
        m.palette.push_back(std::move(e));
    }
    try {
        m.validate();
    } catch (const std::domain_error& ex) {
        throw FormatError(std::string("VHS1: invalid header: ") + ex.what());
    }
    const std::uint8_t has_labels = r.u8("has_labels");
    if (has_labels > 1) {
        throw FormatError("VHS1: has_labels must be 0 or 1");
    }

    const std::size_t blocks_per_slice = ((std::size_t(m.nx) + 3) / 4) * ((std::size_t(m.ny) + 3) / 4);
    r.need(blocks_per_slice * 8 * m.nz, "colour payload");
    std::vector<CompressedSlice> slices;
    slices.reserve(m.nz);
    for (std::uint32_t k = 0; k < m.nz; ++k) {
        std::vector<Bc1Block> blocks(blocks_per_slice);
        for (auto& b : blocks) {
            std::memcpy(b.data(), r.take(8, "colour payload"), 8);
        }
        slices.emplace_back(m.nx, m.ny, std::move(blocks));
    }

    VolumeFile out{ColorVolume(m, std::move(slices)), std::nullopt};
    if (has_labels) {
        const std::size_t plane = std::size_t(m.nx) * m.ny;
        std::vector<std::uint16_t> voxels;
        voxels.reserve(plane * m.nz);
        for (std::uint32_t k = 0; k < m.nz; ++k) {
            std::size_t filled = 0;
            for (;;) {
                const std::uint32_t run = r.u32("label run");
                const std::uint16_t id = r.u16("label run");
                if (run == 0) {
                    break;
                }
                if (filled + run > plane) {
                    throw FormatError("VHS1: label runs overflow slice " + std::to_string(k));
                }
                voxels.insert(voxels.end(), run, id);
                filled += run;
            }
            if (filled != plane) {
                throw FormatError("VHS1: label runs do not cover slice " + std::to_string(k));
            }
        }
        try {
            out.labels.emplace(m, std::move(voxels));
        } catch (const std::domain_error& ex) {
            throw FormatError(std::string("VHS1: ") + ex.what());
        }
    }
    if (!r.at_end()) {
        throw FormatError("VHS1: trailing bytes after payload");
    }
    return out;
}

void write_vhs1(const std::string& path, const ColorVolume& color, const LabelVolume* labels)
{
    const auto bytes = encode_vhs1(color, labels);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw std::runtime_error("write failed for '" + path + "'");
    }
}

VolumeFile read_vhs1(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_vhs1(bytes);
}

} // namespace vhs
