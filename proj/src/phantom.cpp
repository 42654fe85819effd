#include "vhslice/phantom.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace vhs {

namespace {

bool contains(const Ellipsoid& e, const Vec3& q)
{
    const Vec3 d = q - e.center;
    const double s = (d.x / e.semi_axes.x) * (d.x / e.semi_axes.x) + (d.y / e.semi_axes.y) * (d.y / e.semi_axes.y) +
                     (d.z / e.semi_axes.z) * (d.z / e.semi_axes.z);
    return s <= 1.0;
}

std::uint8_t to_u8(double v)
{
    return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

class LineError {
public:
    LineError(std::string key, int line) : key_(std::move(key)), line_(line) {}
    [[noreturn]] void fail(const std::string& what) const
    {
        throw std::domain_error("phantom spec line " + std::to_string(line_) + " (" + key_ + "): " + what);
    }

private:
    std::string key_;
    int line_;
};

template <class T>
std::vector<T> read_all(std::istringstream& in, const LineError& err)
{
    std::vector<T> out;
    std::string tok;
    while (in >> tok) {
        std::istringstream one(tok);
        T v{};
        if (!(one >> v) || !one.eof()) {
            err.fail("expected a number, found '" + tok + "'");
        }
        out.push_back(v);
    }
    return out;
}

Rgb8 rgb_from(const std::vector<double>& v, std::size_t at, const LineError& err)
{
    Rgb8 c;
    std::uint8_t* ch[3] = {&c.r, &c.g, &c.b};
    for (std::size_t i = 0; i < 3; ++i) {
        const double x = v[at + i];
        if (x < 0 || x > 255 || x != std::floor(x)) {
            err.fail("colour channels must be integers in [0, 255]");
        }
        *ch[i] = static_cast<std::uint8_t>(x);
    }
    return c;
}

} // namespace

VolumeMeta PhantomSpec::meta() const
{
    VolumeMeta m;
    m.nx = nx;
    m.ny = ny;
    m.nz = nz;
    m.sx = sx;
    m.sy = sy;
    m.z_table = z_table;
    m.origin = origin;
    m.palette = palette;
    return m;
}

void PhantomSpec::validate() const
{
    if (nx == 0 || ny == 0 || nz == 0) {
        throw std::domain_error("phantom spec: dims must all be >= 1");
    }
    meta().validate();
    for (const auto& e : ellipsoids) {
        if (!(e.semi_axes.x > 0) || !(e.semi_axes.y > 0) || !(e.semi_axes.z > 0)) {
            throw std::domain_error("phantom spec: ellipsoid semi-axes must be > 0");
        }
        if (e.label_id != 0 && meta().find_label(e.label_id) == nullptr) {
            throw std::domain_error("phantom spec: ellipsoid label " + std::to_string(e.label_id) +
                                    " has no palette entry");
        }
    }
    if (noise < 0 || noise > 255) {
        throw std::domain_error("phantom spec: noise must be in [0, 255]");
    }
}

std::optional<std::size_t> containing_ellipsoid(const PhantomSpec& spec, const Vec3& q)
{
    for (std::size_t n = spec.ellipsoids.size(); n-- > 0;) {
        if (contains(spec.ellipsoids[n], q)) {
            return n;
        }
    }
    return std::nullopt;
}

Phantom generate_phantom(const PhantomSpec& spec)
{
    spec.validate();
    const VolumeMeta meta = spec.meta();

    std::mt19937_64 rng(spec.seed);
    std::uniform_int_distribution<int> jitter(-spec.noise, spec.noise);

    std::vector<RgbImage> slices;
    slices.reserve(spec.nz);
    std::vector<std::uint16_t> labels(meta.voxel_count(), 0);

    for (std::uint32_t k = 0; k < spec.nz; ++k) {
        RgbImage img(spec.nx, spec.ny, spec.background);
        for (std::uint32_t j = 0; j < spec.ny; ++j) {
            for (std::uint32_t i = 0; i < spec.nx; ++i) {
                const Vec3 q = voxel_to_world(meta, i, j, k);
                Rgb8 c = spec.background;
                if (const auto hit = containing_ellipsoid(spec, q)) {
                    const Ellipsoid& e = spec.ellipsoids[*hit];
                    c = e.color;
                    labels[(std::size_t(k) * spec.ny + j) * spec.nx + i] = e.label_id;
                }
                if (spec.gradient) {
                    const auto& g = *spec.gradient;
                    c = {to_u8(g.base[0] + dot(g.per_mm[0], q)), to_u8(g.base[1] + dot(g.per_mm[1], q)),
                         to_u8(g.base[2] + dot(g.per_mm[2], q))};
                }
                if (spec.noise > 0) {
                    c = {to_u8(c.r + jitter(rng)), to_u8(c.g + jitter(rng)), to_u8(c.b + jitter(rng))};
                }
                img.at(i, j) = c;
            }
        }
        slices.push_back(std::move(img));
    }
    return {RawColorVolume(meta, std::move(slices)), LabelVolume(meta, std::move(labels))};
}

PhantomSpec parse_phantom_spec(std::istream& in)
{
    PhantomSpec spec;
    std::optional<double> z_spacing;
    bool have_dims = false;
    // Ellipsoids without an explicit colour take their label's palette colour once all labels are known.
    std::vector<bool> inherit_color;

    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::domain_error("phantom spec line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const LineError err(key, line_no);
        std::istringstream vs(value);

        auto numbers = [&](std::size_t min_n, std::size_t max_n) {
            auto v = read_all<double>(vs, err);
            if (v.size() < min_n || v.size() > max_n) {
                err.fail("wrong number of values");
            }
            return v;
        };

        if (key == "dims") {
            const auto v = numbers(3, 3);
            for (double d : v) {
                if (d < 0 || d != std::floor(d) || d > 1e6) {
                    err.fail("dims must be non-negative integers");
                }
            }
            spec.nx = std::uint32_t(v[0]);
            spec.ny = std::uint32_t(v[1]);
            spec.nz = std::uint32_t(v[2]);
            have_dims = true;
        } else if (key == "spacing") {
            const auto v = numbers(2, 2);
            spec.sx = v[0];
            spec.sy = v[1];
        } else if (key == "z_spacing") {
            z_spacing = numbers(1, 1)[0];
            if (!(*z_spacing > 0)) {
                err.fail("z_spacing must be > 0");
            }
        } else if (key == "z_table") {
            spec.z_table = numbers(1, 1u << 20);
        } else if (key == "origin") {
            const auto v = numbers(3, 3);
            spec.origin = {v[0], v[1], v[2]};
        } else if (key == "background") {
            spec.background = rgb_from(numbers(3, 3), 0, err);
        } else if (key == "seed") {
            const auto v = read_all<std::uint64_t>(vs, err);
            if (v.size() != 1) {
                err.fail("expected one integer");
            }
            spec.seed = v[0];
        } else if (key == "noise") {
            const auto v = read_all<int>(vs, err);
            if (v.size() != 1) {
                err.fail("expected one integer");
            }
            spec.noise = v[0];
        } else if (key == "label") {
            std::vector<double> v(4);
            for (auto& x : v) {
                if (!(vs >> x)) {
                    err.fail("expected <id> <r> <g> <b> <name>");
                }
            }
            std::string name;
            std::getline(vs, name);
            name = trim(name);
            if (name.empty()) {
                err.fail("label name missing");
            }
            if (v[0] < 1 || v[0] > 65535 || v[0] != std::floor(v[0])) {
                err.fail("label id must be an integer in [1, 65535]");
            }
            spec.palette.push_back({std::uint16_t(v[0]), name, rgb_from(v, 1, err)});
        } else if (key == "ellipsoid") {
            const auto v = numbers(7, 10);
            if (v.size() != 7 && v.size() != 10) {
                err.fail("expected 7 or 10 values");
            }
            if (v[0] < 0 || v[0] > 65535 || v[0] != std::floor(v[0])) {
                err.fail("label id must be an integer in [0, 65535]");
            }
            Ellipsoid e;
            e.label_id = std::uint16_t(v[0]);
            e.center = {v[1], v[2], v[3]};
            e.semi_axes = {v[4], v[5], v[6]};
            if (v.size() == 10) {
                e.color = rgb_from(v, 7, err);
            }
            inherit_color.push_back(v.size() == 7);
            spec.ellipsoids.push_back(e);
        } else if (key == "gradient") {
            const auto v = numbers(12, 12);
            GradientField g;
            g.base = {v[0], v[1], v[2]};
            for (std::size_t c = 0; c < 3; ++c) {
                g.per_mm[c] = {v[3 + 3 * c], v[4 + 3 * c], v[5 + 3 * c]};
            }
            spec.gradient = g;
        } else {
            err.fail("unknown key");
        }
    }

    if (!have_dims) {
        throw std::domain_error("phantom spec: dims missing");
    }
    if (spec.z_table.empty()) {
        spec.z_table = uniform_z_table(spec.nz, z_spacing.value_or(1.0), spec.origin.z);
    }
    for (std::size_t n = 0; n < spec.ellipsoids.size(); ++n) {
        if (!inherit_color[n]) {
            continue;
        }
        auto& e = spec.ellipsoids[n];
        const auto it = std::find_if(spec.palette.begin(), spec.palette.end(),
                                     [&](const auto& p) { return p.id == e.label_id; });
        e.color = it == spec.palette.end() ? spec.background : it->color;
    }
    spec.validate();
    return spec;
}

PhantomSpec load_phantom_spec(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open phantom spec '" + path + "'");
    }
    return parse_phantom_spec(in);
}

} // namespace vhs
