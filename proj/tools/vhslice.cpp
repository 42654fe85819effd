#include "vhslice/codec.hpp"
#include "vhslice/container.hpp"
#include "vhslice/image_io.hpp"
#include "vhslice/phantom.hpp"
#include "vhslice/server.hpp"
#include "vhslice/session.hpp"
#include "vhslice/slicer.hpp"
#include "vhslice/stack_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using namespace vhs;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string ratio_text(double r)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(1) << r << ":1";
    return os.str();
}

std::size_t file_size_of(const std::string& path) { return static_cast<std::size_t>(fs::file_size(path)); }

VolumeFile load_volume(const std::string& path)
{
    if (!fs::is_regular_file(path)) {
        throw InputError("no such file '" + path + "'");
    }
    return read_vhs1(path);
}

// phantom ------------------------------------------------------------------

struct PhantomArgs {
    std::string spec;
    std::string out;
    bool compress = false;
    std::uint32_t factor = 1;
};

int cmd_phantom(const PhantomArgs& a)
{
    const PhantomSpec spec = load_phantom_spec(a.spec);
    const Phantom ph = generate_phantom(spec);
    if (!a.compress) {
        write_slice_stack(a.out, ph.color, &ph.labels);
        std::cout << "wrote " << spec.nz << " slices to " << a.out << "\n";
        return kExitOk;
    }
    CompressionResult c = compress_volume(ph.color, a.factor, std::nullopt);
    const LabelVolume labels = a.factor == 1 ? ph.labels : downsample_label_volume(ph.labels, a.factor);
    write_vhs1(a.out, c.color, &labels);
    std::cout << "wrote " << a.out << " (" << file_size_of(a.out) << " bytes)\n";
    return kExitOk;
}

// ingest -------------------------------------------------------------------

struct IngestArgs {
    std::string dir;
    std::string out;
    std::uint32_t factor = 1;
    std::string keys;
    bool labels = false;
};

int cmd_ingest(const IngestArgs& a)
{
    if (!a.keys.empty() && a.labels) {
        throw UsageError("--keys and --labels are mutually exclusive");
    }
    const auto t0 = std::chrono::steady_clock::now();
    SliceStack stack = read_slice_stack(a.dir, a.labels);

    std::optional<ColorKeyTable> table;
    if (!a.keys.empty()) {
        std::ifstream kf(a.keys);
        if (!kf) {
            throw InputError("cannot open colour-key file '" + a.keys + "'");
        }
        ColorKeyFile keys = parse_color_keys(kf);
        VolumeMeta meta = stack.color.meta();
        for (const auto& e : keys.palette) {
            if (meta.find_label(e.id) == nullptr) {
                meta.palette.push_back(e);
            }
        }
        stack.color = RawColorVolume(meta, stack.color.slices());
        table = std::move(keys.table);
    }

    CompressionResult c = compress_volume(stack.color, a.factor, table);
    if (stack.labels) {
        c.labels = a.factor == 1 ? *stack.labels : downsample_label_volume(*stack.labels, a.factor);
    }
    write_vhs1(a.out, c.color, c.labels ? &*c.labels : nullptr);
    const double elapsed = seconds_since(t0);

    const VolumeMeta& in = stack.color.meta();
    const VolumeMeta& out = c.color.meta();
    const double raw = double(stack.color.raw_bytes());
    const std::size_t file = file_size_of(a.out);
    std::cout << "slices: " << in.nz << " (" << in.nx << "x" << in.ny << " -> " << out.nx << "x" << out.ny
              << ", factor " << a.factor << ")\n";
    std::cout << "labels: " << (table ? "colour keys" : stack.labels ? "label rasters" : "none") << "\n";
    std::cout << "raw rgb888: " << stack.color.raw_bytes() << " bytes\n";
    std::cout << "color payload: " << c.color.payload_bytes() << " bytes, ratio "
              << ratio_text(raw / double(c.color.payload_bytes())) << "\n";
    std::cout << "file: " << file << " bytes, ratio " << ratio_text(raw / double(file)) << "\n";
    std::cout << "elapsed: " << std::fixed << std::setprecision(3) << elapsed << " s\n";
    return kExitOk;
}

// info ---------------------------------------------------------------------

int cmd_info(const std::string& path)
{
    const auto t0 = std::chrono::steady_clock::now();
    const VolumeFile f = load_volume(path);
    const double load = seconds_since(t0);
    const VolumeMeta& m = f.color.meta();
    std::cout << "dims: " << m.nx << " " << m.ny << " " << m.nz << "\n";
    std::cout << "spacing: " << m.sx << " " << m.sy << "\n";
    std::cout << "z: " << m.z_table.front() << " .. " << m.z_table.back() << " (" << m.z_table.size()
              << " positions)\n";
    std::cout << "origin: " << m.origin.x << " " << m.origin.y << " " << m.origin.z << "\n";
    std::cout << "color payload: " << f.color.payload_bytes() << " bytes\n";
    std::cout << "labels: " << (f.labels ? "yes" : "no") << "\n";
    std::cout << "palette: " << m.palette.size() << " entries\n";
    for (const auto& e : m.palette) {
        std::cout << "  " << e.id << " " << e.name << " (" << int(e.color.r) << " " << int(e.color.g) << " "
                  << int(e.color.b) << ")\n";
    }
    std::cout << "load: " << std::fixed << std::setprecision(3) << load << " s\n";
    return kExitOk;
}

// slice --------------------------------------------------------------------

struct SliceArgs {
    std::string file;
    std::string out;
    std::string axis;
    double position = 0.0;
    std::vector<double> center;
    std::vector<double> u;
    std::vector<double> v;
    double hu = 0.0;
    double hv = 0.0;
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    double scale = 1.0;
};

Vec3 vec_arg(const std::vector<double>& v) { return {v[0], v[1], v[2]}; }

int cmd_slice(const SliceArgs& a)
{
    const VolumeFile f = load_volume(a.file);
    const VolumeMeta& meta = f.color.meta();
    PlaneSlicer plane = default_session(meta).plane;
    if (!a.axis.empty()) {
        const Axis axis = a.axis == "axial" ? Axis::Axial : a.axis == "coronal" ? Axis::Coronal : Axis::Sagittal;
        plane = axis_preset(meta, axis, a.position);
    }
    if (!a.center.empty()) {
        plane.center = vec_arg(a.center);
    }
    if (!a.u.empty()) {
        plane.u = vec_arg(a.u);
    }
    if (!a.v.empty()) {
        plane.v = vec_arg(a.v);
    }
    if (a.hu > 0) {
        plane.hu = a.hu;
    }
    if (a.hv > 0) {
        plane.hv = a.hv;
    }
    if (a.width > 0) {
        plane.width = a.width;
    }
    if (a.height > 0) {
        plane.height = a.height;
    }
    if (!orthonormalize_pair(plane.u, plane.v, kBasisRepairTolerance)) {
        throw UsageError("--u and --v must be orthonormal");
    }
    plane.validate();
    const SliceImage img = render_plane_slice(plane, f.color, f.labels ? &*f.labels : nullptr, a.scale);
    const std::string ext = fs::path(a.out).extension().string();
    if (ext == ".ppm") {
        write_slice_ppm(a.out, img);
    } else {
        write_slice_png(a.out, img);
    }
    std::cout << "wrote " << a.out << " (" << img.width << "x" << img.height << ")\n";
    return kExitOk;
}

// bench --------------------------------------------------------------------

struct BenchArgs {
    std::string file;
    std::size_t iterations = 20;
    std::uint64_t seed = 1;
};

struct Summary {
    double median = 0.0;
    double p95 = 0.0;
};

Summary summarize(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    const double median = n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    const std::size_t rank = static_cast<std::size_t>(std::ceil(0.95 * double(n)));
    return {median, v[std::max<std::size_t>(rank, 1) - 1]};
}

PlaneSlicer random_oblique_plane(const VolumeMeta& meta, std::mt19937_64& rng)
{
    std::normal_distribution<double> gauss;
    Vec3 n;
    do {
        n = {gauss(rng), gauss(rng), gauss(rng)};
    } while (norm(n) < 1e-6);
    n = normalized(n);
    const Vec3 helper = std::abs(n.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    const Vec3 u = normalized(cross(helper, n));
    const Vec3 v = cross(n, u);
    const Vec3 lo = meta.origin + Vec3{0, 0, meta.z_table.front() - meta.origin.z};
    const Vec3 hi{meta.origin.x + (meta.nx - 1) * meta.sx, meta.origin.y + (meta.ny - 1) * meta.sy,
                  meta.z_table.back()};
    const double half = 0.5 * std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z, 1.0});
    PlaneSlicer p;
    p.center = 0.5 * (lo + hi);
    p.u = u;
    p.v = v;
    p.hu = half;
    p.hv = half;
    p.width = 512;
    p.height = 512;
    return p;
}

int cmd_bench(const BenchArgs& a)
{
    const VolumeFile f = load_volume(a.file);
    const VolumeMeta& meta = f.color.meta();
    const LabelVolume* labels = f.labels ? &*f.labels : nullptr;
    std::cout << "metric,scale,iterations,median,p95\n";
    if (a.iterations == 0) {
        return kExitOk;
    }
    std::mt19937_64 rng(a.seed);
    std::vector<PlaneSlicer> planes;
    for (std::size_t n = 0; n < a.iterations; ++n) {
        planes.push_back(random_oblique_plane(meta, rng));
    }
    for (const double scale : {1.0, 0.5, 0.25}) {
        std::vector<double> ms;
        for (const auto& p : planes) {
            const auto t0 = std::chrono::steady_clock::now();
            const SliceImage img = render_plane_slice(p, f.color, labels, scale);
            ms.push_back(seconds_since(t0) * 1e3);
            if (img.rgba.empty()) {
                throw std::runtime_error("empty render");
            }
        }
        const Summary s = summarize(ms);
        std::cout << "slice_512_ms," << scale << "," << a.iterations << "," << s.median << "," << s.p95 << "\n";
    }

    constexpr std::size_t kProbes = 1 << 18;
    std::uniform_int_distribution<std::uint32_t> di(0, meta.nx - 1), dj(0, meta.ny - 1), dk(0, meta.nz - 1);
    std::vector<std::array<std::uint32_t, 3>> probes(kProbes);
    for (auto& p : probes) {
        p = {di(rng), dj(rng), dk(rng)};
    }
    std::vector<double> ns;
    unsigned sink = 0;
    for (std::size_t n = 0; n < a.iterations; ++n) {
        const auto t0 = std::chrono::steady_clock::now();
        for (const auto& p : probes) {
            const Rgb8 c = f.color.slices()[p[2]].decode_texel(p[0], p[1]);
            sink += c.r + c.g + c.b;
        }
        ns.push_back(seconds_since(t0) * 1e9 / double(kProbes));
    }
    const Summary s = summarize(ns);
    std::cout << "decode_ns_per_texel,1," << a.iterations << "," << s.median << "," << s.p95 << "\n";
    if (sink == 0xFFFFFFFFu) {
        std::cerr << "\n";
    }
    return kExitOk;
}

// serve --------------------------------------------------------------------

struct ServeArgs {
    std::vector<std::string> files;
    std::string address = "127.0.0.1";
    std::uint16_t port = 8080;
    unsigned threads = 1;
    std::string synonyms;
};

// `alias = label id`, one per line.
SynonymTable load_synonyms(const std::string& path)
{
    SynonymTable table;
    if (path.empty()) {
        return table;
    }
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open synonym file '" + path + "'");
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = line.substr(0, line.find('#'));
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const auto eq = line.find('=');
        unsigned long id = 0;
        try {
            id = eq == std::string::npos ? 0 : std::stoul(line.substr(eq + 1));
        } catch (const std::exception&) {
            id = 0;
        }
        if (id == 0 || id > 65535) {
            throw InputError("synonyms line " + std::to_string(line_no) + ": expected <alias> = <label id>");
        }
        table.add(line.substr(0, eq), static_cast<std::uint16_t>(id));
    }
    return table;
}

int cmd_serve(const ServeArgs& a)
{
    auto catalog = std::make_shared<VolumeCatalog>();
    const SynonymTable synonyms = load_synonyms(a.synonyms);
    for (const auto& path : a.files) {
        const std::string id = fs::path(path).stem().string();
        if (catalog->find(id) != nullptr) {
            throw UsageError("duplicate volume id '" + id + "'");
        }
        catalog->add(id, load_volume(path), synonyms);
        std::clog << "loaded " << id << " from " << path << std::endl;
    }
    std::unique_ptr<Server> server;
    try {
        server = std::make_unique<Server>(catalog, a.address, a.port,
                                          [](const std::string& line) { std::clog << line << std::endl; });
    } catch (const std::exception& e) {
        std::cerr << "error: cannot listen on " << a.address << ":" << a.port << ": " << e.what() << "\n";
        return kExitRuntime;
    }
    server->stop_on_signals();
    std::clog << "listening on " << a.address << ":" << server->port() << std::endl;
    server->run(std::max(1u, a.threads));
    std::clog << "stopped" << std::endl;
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"vhslice: compressed colour volumes, oblique slicing and a streaming slice server"};
    app.require_subcommand(1);

    PhantomArgs phantom;
    auto* p = app.add_subcommand("phantom", "Generate a synthetic labelled volume from a spec file");
    p->add_option("spec", phantom.spec, "Phantom spec file")->required();
    p->add_option("out", phantom.out, "Output directory (raw stack) or VHS1 file (--compress)")->required();
    p->add_flag("--compress", phantom.compress, "Write a VHS1 file instead of a raw slice directory");
    p->add_option("--factor", phantom.factor, "In-plane downsample factor with --compress")
        ->default_val(1)
        ->check(CLI::PositiveNumber);

    IngestArgs ingest;
    auto* g = app.add_subcommand("ingest", "Compress a slice directory into a VHS1 file");
    g->add_option("dir", ingest.dir, "Directory of .ppm/.png slices plus manifest.txt")->required();
    g->add_option("out", ingest.out, "Output VHS1 file")->required();
    g->add_option("--factor", ingest.factor, "In-plane downsample factor")->default_val(1)->check(CLI::PositiveNumber);
    g->add_option("--keys", ingest.keys, "Colour-key table: <id> <r> <g> <b> <tolerance> <name>");
    g->add_flag("--labels", ingest.labels, "Use exact label rasters from <dir>/labels");

    std::string info_file;
    auto* i = app.add_subcommand("info", "Print the header of a VHS1 file");
    i->add_option("file", info_file, "VHS1 file")->required();

    SliceArgs slice;
    auto* s = app.add_subcommand("slice", "Render one plane to PNG (or PPM) with a .geom sidecar");
    s->add_option("file", slice.file, "VHS1 file")->required();
    s->add_option("out", slice.out, "Output image (.png or .ppm)")->required();
    s->add_option("--axis", slice.axis, "Axis preset")->check(CLI::IsMember({"axial", "coronal", "sagittal"}));
    s->add_option("--pos", slice.position, "Preset position in mm")->default_val(0.0);
    s->add_option("--center", slice.center, "Plane centre x y z (mm)")->expected(3);
    s->add_option("--u", slice.u, "In-plane axis u")->expected(3);
    s->add_option("--v", slice.v, "In-plane axis v")->expected(3);
    s->add_option("--hu", slice.hu, "Half extent along u (mm)");
    s->add_option("--hv", slice.hv, "Half extent along v (mm)");
    s->add_option("--width", slice.width, "Output width in pixels");
    s->add_option("--height", slice.height, "Output height in pixels");
    s->add_option("--scale", slice.scale, "Resolution scale in (0, 1]")->default_val(1.0);

    BenchArgs bench;
    auto* b = app.add_subcommand("bench", "Time 512x512 oblique renders and texel decode; CSV to stdout");
    b->add_option("file", bench.file, "VHS1 file")->required();
    b->add_option("--iterations", bench.iterations, "Samples per metric")->default_val(20);
    b->add_option("--seed", bench.seed, "Plane RNG seed")->default_val(1);

    ServeArgs serve;
    auto* v = app.add_subcommand("serve", "Serve GET /volumes and the /session WebSocket protocol");
    v->add_option("files", serve.files, "VHS1 files; the id is the file stem")->required();
    v->add_option("--address", serve.address, "Listen address")->default_val("127.0.0.1");
    v->add_option("--port", serve.port, "Listen port (0 picks one)")->default_val(8080);
    v->add_option("--threads", serve.threads, "Worker threads")->default_val(1);
    v->add_option("--synonyms", serve.synonyms, "Synonym file: <alias> = <label id>");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*p) {
            return cmd_phantom(phantom);
        }
        if (*g) {
            return cmd_ingest(ingest);
        }
        if (*i) {
            return cmd_info(info_file);
        }
        if (*s) {
            return cmd_slice(slice);
        }
        if (*b) {
            return cmd_bench(bench);
        }
        return cmd_serve(serve);
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ImageIoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
