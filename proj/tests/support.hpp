#pragma once

// Independent reference implementations and fixtures shared by the unit tests
// and the acceptance runner. Oracles here deliberately avoid the library's
// own sampling and lookup code paths.

#include "vhslice/bc1.hpp"
#include "vhslice/phantom.hpp"
#include "vhslice/server.hpp"
#include "vhslice/volume.hpp"

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <array>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace vhs::testing {

inline VolumeMeta make_meta(std::uint32_t nx, std::uint32_t ny, std::uint32_t nz, double sx = 1.0, double sy = 1.0,
                            std::vector<double> z_table = {}, Vec3 origin = {})
{
    VolumeMeta m;
    m.nx = nx;
    m.ny = ny;
    m.nz = nz;
    m.sx = sx;
    m.sy = sy;
    m.z_table = z_table.empty() ? uniform_z_table(nz, 1.0) : std::move(z_table);
    m.origin = origin;
    return m;
}

inline std::vector<RgbImage> random_slices(const VolumeMeta& m, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> d(0, 255);
    std::vector<RgbImage> out;
    for (std::uint32_t k = 0; k < m.nz; ++k) {
        RgbImage img(m.nx, m.ny);
        for (auto& p : img.pixels()) {
            p = {std::uint8_t(d(rng)), std::uint8_t(d(rng)), std::uint8_t(d(rng))};
        }
        out.push_back(std::move(img));
    }
    return out;
}

inline ColorVolume compress_all(const VolumeMeta& m, const std::vector<RgbImage>& slices)
{
    std::vector<CompressedSlice> c;
    for (const auto& s : slices) {
        c.push_back(compress_slice(s));
    }
    return ColorVolume(m, std::move(c));
}

/// Fully decoded voxel grid: [k][j][i].
struct DecodedGrid {
    VolumeMeta meta;
    std::vector<RgbImage> slices;

    explicit DecodedGrid(const ColorVolume& v) : meta(v.meta())
    {
        for (const auto& s : v.slices()) {
            slices.push_back(s.decompress());
        }
    }
    explicit DecodedGrid(const RawColorVolume& v) : meta(v.meta()), slices(v.slices()) {}
};

/// Continuous index by linear scan of the z table.
inline std::array<double, 3> oracle_index(const VolumeMeta& m, const Vec3& p)
{
    const double fx = (p.x - m.origin.x) / m.sx;
    const double fy = (p.y - m.origin.y) / m.sy;
    if (m.nz == 1) {
        return {fx, fy, p.z - m.z_table[0]};
    }
    std::size_t k = 0;
    while (k + 2 < m.nz && p.z > m.z_table[k + 1]) {
        ++k;
    }
    return {fx, fy, double(k) + (p.z - m.z_table[k]) / (m.z_table[k + 1] - m.z_table[k])};
}

/// Explicit eight-corner weighted sum.
inline std::optional<std::array<double, 3>> oracle_trilinear(const DecodedGrid& g, const Vec3& p, double eps = 1e-9)
{
    const auto f = oracle_index(g.meta, p);
    const std::array<std::uint32_t, 3> n{g.meta.nx, g.meta.ny, g.meta.nz};
    std::array<std::size_t, 3> lo{};
    std::array<double, 3> t{};
    for (int a = 0; a < 3; ++a) {
        if (f[a] < -eps || f[a] > double(n[a] - 1) + eps) {
            return std::nullopt;
        }
        const double c = std::min(std::max(f[a], 0.0), double(n[a] - 1));
        lo[a] = std::min<std::size_t>(std::size_t(std::floor(c)), n[a] - 1);
        t[a] = c - double(lo[a]);
    }
    std::array<double, 3> out{0, 0, 0};
    for (int corner = 0; corner < 8; ++corner) {
        std::array<std::size_t, 3> idx{};
        double w = 1.0;
        for (int a = 0; a < 3; ++a) {
            const bool up = (corner >> a) & 1;
            idx[a] = std::min<std::size_t>(lo[a] + (up ? 1 : 0), n[a] - 1);
            w *= up ? t[a] : 1.0 - t[a];
        }
        const Rgb8 c = g.slices[idx[2]].at(idx[0], idx[1]);
        out[0] += w * c.r;
        out[1] += w * c.g;
        out[2] += w * c.b;
    }
    return out;
}

inline Vec3 random_point_in(const VolumeMeta& m, std::mt19937_64& rng, double margin = 0.0)
{
    std::uniform_real_distribution<double> ux(m.origin.x + margin * m.sx, m.origin.x + (m.nx - 1 - margin) * m.sx);
    std::uniform_real_distribution<double> uy(m.origin.y + margin * m.sy, m.origin.y + (m.ny - 1 - margin) * m.sy);
    std::uniform_real_distribution<double> uz(m.z_table.front(), m.z_table.back());
    return {ux(rng), uy(rng), uz(rng)};
}

inline Vec3 random_unit(std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    for (;;) {
        const Vec3 v{g(rng), g(rng), g(rng)};
        if (norm(v) > 1e-6) {
            return normalized(v);
        }
    }
}

/// Small labelled sphere phantom used across service tests.
inline PhantomSpec sphere_spec(std::uint32_t n = 32, std::uint32_t nz = 16)
{
    PhantomSpec s;
    s.nx = n;
    s.ny = n;
    s.nz = nz;
    s.sx = 1.0;
    s.sy = 1.0;
    s.z_table = uniform_z_table(nz, 1.0);
    s.palette = {{1, "liver", {200, 80, 60}}, {2, "kidney", {90, 40, 160}}};
    s.ellipsoids = {{{n / 2.0 - 0.5, n / 2.0 - 0.5, nz / 2.0 - 0.5}, {n / 3.0, n / 3.0, nz / 3.0}, 1, {200, 80, 60}},
                    {{n / 2.0 + 2.0, n / 2.0 - 0.5, nz / 2.0 - 0.5}, {n / 8.0, n / 6.0, nz / 5.0}, 2, {90, 40, 160}}};
    s.background = {10, 10, 10};
    s.seed = 3;
    return s;
}

/// Runs a Server on a background thread for the lifetime of the object.
class LoopbackServer {
public:
    explicit LoopbackServer(std::shared_ptr<const VolumeCatalog> catalog,
                            std::function<void(Session&)> setup = {})
        : server_(std::move(catalog), "127.0.0.1", 0)
    {
        if (setup) {
            server_.set_session_setup(std::move(setup));
        }
        thread_ = std::thread([this] { server_.run(2); });
    }
    ~LoopbackServer()
    {
        server_.stop();
        thread_.join();
    }

    std::uint16_t port() const { return server_.port(); }

private:
    Server server_;
    std::thread thread_;
};

/// Blocking WebSocket client for /session.
class WsClient {
public:
    explicit WsClient(std::uint16_t port) : ws_(ioc_)
    {
        boost::asio::ip::tcp::resolver resolver(ioc_);
        boost::asio::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
        ws_.handshake("127.0.0.1", "/session");
        ws_.text(true);
    }

    void send(const std::string& text) { ws_.write(boost::asio::buffer(text)); }
    void send(const json& msg) { send(msg.dump()); }

    json receive()
    {
        boost::beast::flat_buffer buf;
        ws_.read(buf);
        return json::parse(boost::beast::buffers_to_string(buf.data()));
    }

    std::vector<json> exchange(const json& msg, std::size_t replies)
    {
        send(msg);
        std::vector<json> out;
        for (std::size_t n = 0; n < replies; ++n) {
            out.push_back(receive());
        }
        return out;
    }

    ~WsClient()
    {
        boost::beast::error_code ec;
        ws_.close(boost::beast::websocket::close_code::normal, ec);
    }

private:
    boost::asio::io_context ioc_;
    boost::beast::websocket::stream<boost::asio::ip::tcp::socket> ws_;
};

inline std::pair<int, std::string> http_get(std::uint16_t port, const std::string& target)
{
    namespace http = boost::beast::http;
    boost::asio::io_context ioc;
    boost::asio::ip::tcp::resolver resolver(ioc);
    boost::beast::tcp_stream stream(ioc);
    stream.connect(resolver.resolve("127.0.0.1", std::to_string(port)));
    http::request<http::empty_body> req{http::verb::get, target, 11};
    req.set(http::field::host, "127.0.0.1");
    http::write(stream, req);
    boost::beast::flat_buffer buf;
    http::response<http::string_body> res;
    http::read(stream, buf, res);
    boost::beast::error_code ec;
    stream.socket().shutdown(boost::asio::ip::tcp::socket::shutdown_both, ec);
    return {res.result_int(), res.body()};
}

} // namespace vhs::testing
