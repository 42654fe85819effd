#include "support.hpp"

#include "vhslice/annotate.hpp"
#include "vhslice/image_io.hpp"
#include "vhslice/service.hpp"

#include <gtest/gtest.h>

#include <future>

using namespace vhs;
using namespace vhs::testing;

namespace {

std::shared_ptr<VolumeCatalog> make_catalog()
{
    const Phantom ph = generate_phantom(sphere_spec(32, 16));
    auto cat = std::make_shared<VolumeCatalog>();
    SynonymTable syn;
    syn.add("hepatic organ", 1);
    cat->add("sphere", VolumeFile{compress_all(ph.color.meta(), ph.color.slices()), ph.labels}, syn);
    return cat;
}

json hello() { return {{"type", "hello"}, {"volume", "sphere"}}; }

json set_plane(Vec3 c, Vec3 u, Vec3 v, double hu, double hv, int w, int h)
{
    return {{"type", "set_plane"}, {"center", {c.x, c.y, c.z}}, {"u", {u.x, u.y, u.z}}, {"v", {v.x, v.y, v.z}},
            {"hu", hu},           {"hv", hv},                    {"w", w},                {"h", h}};
}

RgbaImage frame_image(const json& frame, std::size_t n = 0)
{
    return decode_png_rgba(base64_decode(frame["images"][n]["png_b64"].get<std::string>()));
}

json strip_timing(json m)
{
    m.erase("render_ms");
    return m;
}

} // namespace

TEST(SessionProtocol, HelloEchoesMeta)
{
    Session s(make_catalog());
    const auto r = s.handle_message(hello());
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0]["type"], "hello");
    EXPECT_EQ(r[0]["nx"], 32);
    EXPECT_EQ(r[0]["ny"], 32);
    EXPECT_EQ(r[0]["nz"], 16);
    EXPECT_EQ(r[0]["z_count"], 16);
    EXPECT_EQ(r[0]["palette"][0]["name"], "liver");
    EXPECT_EQ(r[0]["palette"][1]["name"], "kidney");
    EXPECT_TRUE(s.established());
}

TEST(SessionProtocol, UnknownVolumeAndMissingHello)
{
    Session s(make_catalog());
    auto r = s.handle_message(set_plane({16, 16, 8}, {1, 0, 0}, {0, 1, 0}, 8, 8, 16, 16));
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0]["type"], "error");
    r = s.handle_message({{"type", "hello"}, {"volume", "nope"}});
    EXPECT_EQ(r[0]["type"], "error");
    EXPECT_FALSE(s.established());
}

TEST(SessionProtocol, UnknownTypeAndMalformed)
{
    Session s(make_catalog());
    s.handle_message(hello());
    EXPECT_EQ(s.handle_message({{"type", "warp"}})[0]["type"], "error");
    EXPECT_EQ(s.handle_message(json::array())[0]["type"], "error");
    const auto t = s.handle_text("{not json");
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(json::parse(t[0])["type"], "error");
    const auto bad = s.handle_message({{"type", "set_plane"}, {"center", {1, 2}}});
    EXPECT_EQ(bad[0]["type"], "error");
    EXPECT_NE(bad[0]["reason"].get<std::string>().find("center"), std::string::npos);
}

TEST(SessionProtocol, OversizedMessageRejected)
{
    Session s(make_catalog());
    s.handle_message(hello());
    std::string big = R"({"type":"command","text":")" + std::string(kMaxMessageBytes, 'a') + "\"}";
    const auto r = s.handle_text(big);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(json::parse(r[0])["type"], "error");
}

TEST(SessionProtocol, SetPlaneRendersFrameAndAnnotations)
{
    Session s(make_catalog());
    s.handle_message(hello());
    const auto r = s.handle_message(set_plane({15.5, 15.5, 7}, {1, 0, 0}, {0, 1, 0}, 16, 16, 32, 32));
    ASSERT_EQ(r.size(), 2u);
    EXPECT_EQ(r[0]["type"], "frame");
    EXPECT_EQ(r[0]["seq"], 1);
    EXPECT_EQ(r[0]["scale"], 1.0);
    EXPECT_EQ(r[0]["mode"], "plane");
    EXPECT_EQ(r[0]["images"].size(), 1u);
    EXPECT_EQ(r[0]["images"][0]["w"], 32);
    EXPECT_TRUE(r[0]["geometry"].contains("center"));
    EXPECT_EQ(r[1]["type"], "annotations");
    ASSERT_GE(r[1]["items"].size(), 1u);
    EXPECT_EQ(r[1]["items"][0]["name"], "liver");
    EXPECT_EQ(r[1]["items"][0]["anchor"].size(), 2u);
    const auto img = frame_image(r[0]);
    EXPECT_EQ(img.width, 32u);
}

TEST(SessionProtocol, BadBasisLeavesStateUnchanged)
{
    Session s(make_catalog());
    s.handle_message(hello());
    s.handle_message(set_plane({15.5, 15.5, 7}, {1, 0, 0}, {0, 1, 0}, 16, 16, 32, 32));
    const SessionState before = s.state();
    const auto r = s.handle_message(set_plane({1, 1, 1}, {1, 0.1, 0}, {0, 1, 0}, 16, 16, 32, 32));
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0]["type"], "error");
    EXPECT_EQ(s.state().plane, before.plane);
    EXPECT_EQ(s.state().seq, before.seq);
}

TEST(SessionProtocol, SmallBasisNoiseRepaired)
{
    Session s(make_catalog());
    s.handle_message(hello());
    const auto r = s.handle_message(set_plane({15.5, 15.5, 7}, {1, 0.0004, 0}, {0, 1, 0}, 16, 16, 8, 8));
    ASSERT_EQ(r[0]["type"], "frame");
    EXPECT_NEAR(norm(s.state().plane.u), 1.0, 1e-12);
    EXPECT_NEAR(dot(s.state().plane.u, s.state().plane.v), 0.0, 1e-12);
}

TEST(SessionProtocol, SequenceIncrementsByOne)
{
    Session s(make_catalog());
    s.handle_message(hello());
    const auto a = s.handle_message(set_plane({15.5, 15.5, 7}, {1, 0, 0}, {0, 1, 0}, 16, 16, 8, 8));
    const auto b = s.handle_message(set_plane({15.5, 15.5, 8}, {1, 0, 0}, {0, 1, 0}, 16, 16, 8, 8));
    EXPECT_EQ(b[0]["seq"].get<int>() - a[0]["seq"].get<int>(), 1);
    EXPECT_EQ(b[1]["seq"], b[0]["seq"]);
}

TEST(SessionProtocol, SyntheticCostLowersScale)
{
    Session s(make_catalog());
    s.set_render_cost_hook([](double) { return 40.0; });
    s.handle_message(hello());
    const auto a = s.handle_message(set_plane({15.5, 15.5, 7}, {1, 0, 0}, {0, 1, 0}, 16, 16, 32, 32));
    EXPECT_EQ(a[0]["scale"], 1.0);
    const auto b = s.handle_message(set_plane({15.5, 15.5, 7}, {1, 0, 0}, {0, 1, 0}, 16, 16, 32, 32));
    EXPECT_EQ(b[0]["scale"], 0.5);
    EXPECT_EQ(b[0]["images"][0]["w"], 16);
}

TEST(SessionProtocol, EmptyHighlightEqualsRawRender)
{
    auto cat = make_catalog();
    const VolumeEntry* v = cat->find("sphere");
    SessionState st = default_session(v->color.meta());
    st.highlight.dim = 1.0;
    const auto f = render_session_frame(st, *v);
    const SliceImage raw = render_plane_slice(st.plane, v->color, v->label_ptr(), 1.0);
    const auto img = frame_image(f.frame);
    EXPECT_EQ(img.rgba, raw.rgba);
}

TEST(SessionProtocol, HideMakesStructureTransparent)
{
    Session s(make_catalog());
    s.handle_message(hello());
    const auto r = s.handle_message({{"type", "command"}, {"text", "hide liver"}});
    ASSERT_EQ(r.size(), 3u);
    EXPECT_EQ(r[0]["type"], "command_result");
    EXPECT_TRUE(r[0]["ok"].get<bool>());
    const auto img = frame_image(r[1]);
    const auto* v = s.volume();
    const SliceImage raw = render_plane_slice(s.state().plane, v->color, v->label_ptr(), 1.0);
    for (std::size_t n = 0; n < raw.labels.size(); ++n) {
        if (raw.labels[n] == 1) {
            ASSERT_EQ(img.rgba[4 * n + 3], 0);
        } else {
            ASSERT_EQ(img.rgba[4 * n + 3], raw.rgba[4 * n + 3]);
        }
    }
    for (const auto& item : r[2]["items"]) {
        EXPECT_NE(item["id"], 1);
    }
}

TEST(SessionProtocol, CommandErrorsAndUnchangedCommands)
{
    Session s(make_catalog());
    s.handle_message(hello());
    auto r = s.handle_message({{"type", "command"}, {"text", "slice diagonal 3"}});
    ASSERT_EQ(r.size(), 1u);
    EXPECT_FALSE(r[0]["ok"].get<bool>());
    EXPECT_EQ(r[0]["error"]["position"], 2);
    r = s.handle_message({{"type", "command"}, {"text", "highlight spleenx"}});
    ASSERT_EQ(r.size(), 1u);
    EXPECT_NE(r[0]["message"].get<std::string>().find("unknown structure"), std::string::npos);
    r = s.handle_message({{"type", "command"}, {"text", "list"}});
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0]["message"], "structures: liver, kidney");
    r = s.handle_message({{"type", "command"}, {"text", "highlight hepatic organ"}});
    EXPECT_EQ(r.size(), 3u);
    EXPECT_TRUE(s.state().highlighted.contains(1));
}

TEST(SessionProtocol, CommandSliceAxialReproducesStoredSlice)
{
    Session s(make_catalog());
    s.handle_message(hello());
    const VolumeEntry* v = s.volume();
    const auto& m = v->color.meta();
    for (std::uint32_t k : {0u, 5u, 15u}) {
        const auto r = s.handle_message({{"type", "command"}, {"text", "slice axial " + std::to_string(m.z_table[k])}});
        ASSERT_EQ(r.size(), 3u);
        const auto img = frame_image(r[1]);
        const RgbImage stored = v->color.slices()[k].decompress();
        ASSERT_EQ(img.width, m.nx);
        for (std::uint32_t j = 0; j < m.ny; ++j) {
            for (std::uint32_t i = 0; i < m.nx; ++i) {
                const Rgb8 c = stored.at(i, m.ny - 1 - j);
                const std::size_t at = (std::size_t(j) * m.nx + i) * 4;
                ASSERT_EQ(img.rgba[at], c.r);
                ASSERT_EQ(img.rgba[at + 1], c.g);
                ASSERT_EQ(img.rgba[at + 2], c.b);
            }
        }
    }
}

TEST(SessionProtocol, PickReturnsPixelAndName)
{
    Session s(make_catalog());
    s.handle_message(hello());
    s.handle_message(set_plane({15.5, 15.5, 7.5}, {1, 0, 0}, {0, 1, 0}, 16, 16, 32, 32));
    const auto r = s.handle_message({{"type", "pick"}, {"origin", {8, 15.5, 20}}, {"dir", {0, 0, -1}}});
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0]["type"], "pick_result");
    EXPECT_TRUE(r[0]["hit"].get<bool>());
    EXPECT_EQ(r[0]["pixel"], json::array({8, 16}));
    EXPECT_EQ(r[0]["id"], 1);
    EXPECT_EQ(r[0]["name"], "liver");
    const auto miss = s.handle_message({{"type", "pick"}, {"origin", {100, 100, 20}}, {"dir", {0, 0, -1}}});
    EXPECT_FALSE(miss[0]["hit"].get<bool>());
    EXPECT_FALSE(miss[0].contains("pixel"));
}

TEST(SessionProtocol, BoxModeSixFacesAndPick)
{
    Session s(make_catalog());
    s.handle_message(hello());
    const json box{{"type", "set_box"},
                   {"center", {15.5, 15.5, 7.5}},
                   {"basis", {1, 0, 0, 0, 1, 0, 0, 0, 1}},
                   {"extents", {4, 4, 4}},
                   {"face_res", 16}};
    const auto r = s.handle_message(box);
    ASSERT_EQ(r.size(), 2u);
    EXPECT_EQ(r[0]["mode"], "box");
    ASSERT_EQ(r[0]["images"].size(), 6u);
    EXPECT_EQ(r[0]["images"][0]["face"], "+r0");
    EXPECT_EQ(r[0]["images"][5]["face"], "-r2");
    EXPECT_TRUE(r[1]["items"].empty());
    const auto p = s.handle_message({{"type", "pick"}, {"origin", {15.5, 15.5, 30}}, {"dir", {0, 0, -1}}});
    EXPECT_TRUE(p[0]["hit"].get<bool>());
    EXPECT_EQ(p[0]["face"], "+r2");
    EXPECT_DOUBLE_EQ(p[0]["world"][2].get<double>(), 11.5);

    const json left{{"type", "set_box"},
                    {"center", {15.5, 15.5, 7.5}},
                    {"basis", {1, 0, 0, 0, 1, 0, 0, 0, -1}},
                    {"extents", {4, 4, 4}},
                    {"face_res", 16}};
    EXPECT_EQ(s.handle_message(left)[0]["type"], "error");
    EXPECT_EQ(s.handle_message({{"type", "set_mode"}, {"mode", "plane"}})[0]["mode"], "plane");
    EXPECT_EQ(s.handle_message({{"type", "set_mode"}, {"mode", "cube"}})[0]["type"], "error");
}

TEST(SessionProtocol, DeterministicScript)
{
    auto run = [] {
        Session s(make_catalog());
        std::vector<json> all;
        for (const auto& m : {hello(), set_plane({15, 14, 7}, {0.6, 0.8, 0}, {0, 0, 1}, 10, 6, 20, 12),
                              json{{"type", "command"}, {"text", "highlight kidney"}},
                              json{{"type", "pick"}, {"origin", {15, 14, 30}}, {"dir", {0, 0.1, -1}}}}) {
            for (auto& r : s.handle_message(m)) {
                all.push_back(strip_timing(r));
            }
        }
        return all;
    };
    EXPECT_EQ(run(), run());
}

TEST(Loopback, VolumesListing)
{
    LoopbackServer srv(make_catalog());
    const auto [status, body] = http_get(srv.port(), "/volumes");
    EXPECT_EQ(status, 200);
    EXPECT_EQ(json::parse(body), (json{{"volumes", {"sphere"}}}));
    EXPECT_EQ(http_get(srv.port(), "/nothing").first, 404);
}

TEST(Loopback, ScriptedSession)
{
    LoopbackServer srv(make_catalog());
    WsClient c(srv.port());
    EXPECT_EQ(c.exchange(hello(), 1)[0]["type"], "hello");
    const auto f = c.exchange(set_plane({15.5, 15.5, 7}, {1, 0, 0}, {0, 1, 0}, 16, 16, 32, 32), 2);
    EXPECT_EQ(f[0]["type"], "frame");
    EXPECT_EQ(f[1]["type"], "annotations");
    c.send(std::string("garbage"));
    EXPECT_EQ(c.receive()["type"], "error");
    const auto p = c.exchange({{"type", "pick"}, {"origin", {15.5, 15.5, 20}}, {"dir", {0, 0, -1}}}, 1);
    EXPECT_EQ(p[0]["type"], "pick_result");
}

TEST(Loopback, SessionsAreIsolated)
{
    LoopbackServer srv(make_catalog());
    WsClient a(srv.port());
    WsClient b(srv.port());
    a.exchange(hello(), 1);
    b.exchange(hello(), 1);
    a.exchange({{"type", "command"}, {"text", "hide kidney"}}, 3);
    const auto fb = b.exchange(set_plane({15.5, 15.5, 7.5}, {1, 0, 0}, {0, 1, 0}, 16, 16, 32, 32), 2);
    const auto fa = a.exchange(set_plane({15.5, 15.5, 7.5}, {1, 0, 0}, {0, 1, 0}, 16, 16, 32, 32), 2);
    EXPECT_EQ(fb[0]["seq"], 1);
    EXPECT_EQ(fa[0]["seq"], 2);
    const auto ib = frame_image(fb[0]);
    const auto ia = frame_image(fa[0]);
    const std::size_t centre = (16 * 32 + 16) * 4 + 3;
    EXPECT_EQ(ib.rgba[centre], 255);
    EXPECT_EQ(ia.rgba[centre], 0);
}

TEST(Loopback, ConcurrentSessionsInOrder)
{
    LoopbackServer srv(make_catalog());
    auto worker = [&](int id) {
        WsClient c(srv.port());
        c.exchange(hello(), 1);
        for (int n = 1; n <= 10; ++n) {
            const auto r = c.exchange(set_plane({15.5, 15.5, double(id + n % 5)}, {1, 0, 0}, {0, 1, 0}, 8, 8, 8, 8), 2);
            if (r[0]["seq"] != n) {
                return false;
            }
        }
        return true;
    };
    std::vector<std::future<bool>> fs;
    for (int id = 0; id < 4; ++id) {
        fs.push_back(std::async(std::launch::async, worker, id));
    }
    for (auto& f : fs) {
        EXPECT_TRUE(f.get());
    }
}

TEST(Loopback, PortInUseThrows)
{
    LoopbackServer srv(make_catalog());
    EXPECT_THROW(Server(make_catalog(), "127.0.0.1", srv.port()), std::exception);
}
