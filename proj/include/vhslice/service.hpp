#pragma once

#include "vhslice/command.hpp"
#include "vhslice/container.hpp"
#include "vhslice/session.hpp"
#include "vhslice/slicer.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vhs {

using json = nlohmann::json;

inline constexpr std::size_t kMaxMessageBytes = 1u << 20;
inline constexpr double kBasisRepairTolerance = 1e-3;
inline constexpr std::uint32_t kMaxProbeResolution = 4096;

/// One servable volume. Immutable once registered.
struct VolumeEntry {
    std::string id;
    ColorVolume color;
    std::optional<LabelVolume> labels;
    SynonymTable synonyms;

    const LabelVolume* label_ptr() const { return labels ? &*labels : nullptr; }
};

/// Read-only after construction; shared by every session.
class VolumeCatalog {
public:
    void add(std::string id, VolumeFile file, SynonymTable synonyms = {});
    const VolumeEntry* find(const std::string& id) const;
    std::vector<std::string> ids() const;

private:
    std::map<std::string, std::shared_ptr<const VolumeEntry>> entries_;
};

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

json slice_geometry_json(const SliceGeometry& g);
json meta_json(const VolumeMeta& meta);

struct RenderedFrame {
    json frame;
    json annotations;
};

/// Rendered images as they were shown to the client, kept for picking.
struct FrameCache {
    ProbeMode mode = ProbeMode::Plane;
    PlaneSlicer plane;
    BoxSlicer box;
    std::vector<SliceImage> images;
};

/// Synthetic render cost in ms as a function of scale; replaces the wall clock when set.
using RenderCostHook = std::function<double(double scale)>;

/// Renders the session's current probe at the controller's scale, applies
/// visibility and highlight, builds annotations, feeds the measured time to the
/// controller and stamps the next sequence number.
RenderedFrame render_session_frame(SessionState& state, const VolumeEntry& volume, FrameCache* cache = nullptr,
                                   const RenderCostHook& cost_hook = {});

/// One protocol session. Not thread-safe: the owner serialises calls (one
/// logical executor per session).
class Session {
public:
    explicit Session(std::shared_ptr<const VolumeCatalog> catalog);

    /// Every message gets one direct reply first; probe changes append
    /// frame-related messages after it. Replies never partially apply: on
    /// error the state is left as it was.
    std::vector<json> handle_message(const json& msg);

    /// Size check and JSON parse, then handle_message; replies serialised.
    std::vector<std::string> handle_text(std::string_view text);

    bool established() const { return volume_ != nullptr; }
    const SessionState& state() const { return state_; }
    const VolumeEntry* volume() const { return volume_; }

    void set_render_cost_hook(RenderCostHook hook) { cost_hook_ = std::move(hook); }

private:
    std::vector<json> on_hello(const json& msg);
    std::vector<json> on_set_plane(const json& msg);
    std::vector<json> on_set_box(const json& msg);
    std::vector<json> on_set_mode(const json& msg);
    std::vector<json> on_pick(const json& msg);
    std::vector<json> on_command(const json& msg);
    std::vector<json> frame_replies();

    std::shared_ptr<const VolumeCatalog> catalog_;
    const VolumeEntry* volume_ = nullptr;
    SessionState state_;
    FrameCache cache_;
    bool cache_valid_ = false;
    RenderCostHook cost_hook_;
};

json error_message(const std::string& reason);

} // namespace vhs
