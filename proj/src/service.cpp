#include "vhslice/service.hpp"

#include "vhslice/annotate.hpp"
#include "vhslice/image_io.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace vhs {

namespace {

class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

const json& field(const json& body, const char* key)
{
    const auto it = body.find(key);
    if (it == body.end()) {
        throw ProtocolError(std::string("missing field '") + key + "'");
    }
    return *it;
}

double number(const json& body, const char* key)
{
    const json& v = field(body, key);
    if (!v.is_number()) {
        throw ProtocolError(std::string("field '") + key + "' must be a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
        throw ProtocolError(std::string("field '") + key + "' must be finite");
    }
    return d;
}

std::vector<double> numbers(const json& body, const char* key, std::size_t count)
{
    const json& v = field(body, key);
    if (!v.is_array() || v.size() != count) {
        throw ProtocolError(std::string("field '") + key + "' must be an array of " + std::to_string(count) +
                            " numbers");
    }
    std::vector<double> out;
    out.reserve(count);
    for (const auto& e : v) {
        if (!e.is_number() || !std::isfinite(e.get<double>())) {
            throw ProtocolError(std::string("field '") + key + "' must contain finite numbers");
        }
        out.push_back(e.get<double>());
    }
    return out;
}

Vec3 vec3(const json& body, const char* key)
{
    const auto v = numbers(body, key, 3);
    return {v[0], v[1], v[2]};
}

std::uint32_t resolution(const json& body, const char* key)
{
    const json& v = field(body, key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 1 || v.get<std::int64_t>() > kMaxProbeResolution) {
        throw ProtocolError(std::string("field '") + key + "' must be an integer in [1, " +
                            std::to_string(kMaxProbeResolution) + "]");
    }
    return static_cast<std::uint32_t>(v.get<std::int64_t>());
}

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

json typed(const char* type) { return json{{"type", type}}; }

// Hidden structures are cut away: transparent and unlabelled.
void apply_visibility(SliceImage& img, const std::set<std::uint16_t>& hidden)
{
    if (hidden.empty()) {
        return;
    }
    for (std::size_t n = 0; n < img.labels.size(); ++n) {
        if (img.labels[n] != 0 && hidden.contains(img.labels[n])) {
            img.labels[n] = 0;
            std::fill_n(&img.rgba[n * 4], 4, std::uint8_t{0});
        }
    }
}

json annotate_image(const SliceImage& img, const VolumeMeta& meta, double scale)
{
    const LabelStats stats = analyze_slice_labels(img.labels, img.width, img.height);
    const auto keys = select_key_labels(stats);
    std::vector<LabelCandidate> candidates;
    for (const auto id : keys) {
        const auto& s = stats.per_label.at(id);
        const auto* entry = meta.find_label(id);
        candidates.push_back({id, entry != nullptr ? entry->name : std::to_string(id), s.count, s.centroid});
    }
    std::vector<LabelAnnotation> placed;
    // Small renders cannot always hold every key label; drop the least prominent.
    while (!candidates.empty()) {
        try {
            placed = place_edge_labels(candidates, img.width, img.height, kDefaultMinSeparationPx * scale);
            break;
        } catch (const PlacementError&) {
            candidates.pop_back();
        }
    }
    json items = json::array();
    for (const auto& a : placed) {
        items.push_back({{"id", a.id},
                         {"name", a.name},
                         {"count", a.count},
                         {"centroid", {a.centroid.x, a.centroid.y}},
                         {"anchor", {a.anchor.x, a.anchor.y}}});
    }
    return items;
}

json image_json(const SliceImage& img)
{
    return {{"w", img.width},
            {"h", img.height},
            {"png_b64", base64_encode(encode_png_rgba(img.width, img.height, img.rgba))},
            {"geometry", slice_geometry_json(img.geometry)}};
}

} // namespace

void VolumeCatalog::add(std::string id, VolumeFile file, SynonymTable synonyms)
{
    auto entry = std::make_shared<VolumeEntry>();
    entry->id = id;
    entry->color = std::move(file.color);
    entry->labels = std::move(file.labels);
    entry->synonyms = std::move(synonyms);
    entries_[std::move(id)] = std::move(entry);
}

const VolumeEntry* VolumeCatalog::find(const std::string& id) const
{
    const auto it = entries_.find(id);
    return it == entries_.end() ? nullptr : it->second.get();
}

std::vector<std::string> VolumeCatalog::ids() const
{
    std::vector<std::string> out;
    for (const auto& [id, _] : entries_) {
        out.push_back(id);
    }
    return out;
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes)
{
    static constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t n = 0;
    for (; n + 2 < bytes.size(); n += 3) {
        const std::uint32_t v = (bytes[n] << 16) | (bytes[n + 1] << 8) | bytes[n + 2];
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += kAlphabet[v & 63];
    }
    if (n + 1 == bytes.size()) {
        const std::uint32_t v = bytes[n] << 16;
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += "==";
    } else if (n + 2 == bytes.size()) {
        const std::uint32_t v = (bytes[n] << 16) | (bytes[n + 1] << 8);
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text)
{
    auto value = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::vector<std::uint8_t> out;
    std::uint32_t acc = 0;
    int bits = 0;
    for (const char c : text) {
        if (c == '=') {
            break;
        }
        const int v = value(c);
        if (v < 0) {
            throw std::invalid_argument("base64: invalid character");
        }
        acc = (acc << 6) | std::uint32_t(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xFF));
        }
    }
    return out;
}

json slice_geometry_json(const SliceGeometry& g)
{
    return {{"center", vec_json(g.center)}, {"u", vec_json(g.u)}, {"v", vec_json(g.v)},
            {"hu", g.hu},                   {"hv", g.hv},         {"scale", g.scale}};
}

json meta_json(const VolumeMeta& meta)
{
    json palette = json::array();
    for (const auto& e : meta.palette) {
        palette.push_back({{"id", e.id}, {"name", e.name}, {"color", {e.color.r, e.color.g, e.color.b}}});
    }
    return {{"nx", meta.nx},
            {"ny", meta.ny},
            {"nz", meta.nz},
            {"spacing", {meta.sx, meta.sy}},
            {"z_table", meta.z_table},
            {"z_count", meta.z_table.size()},
            {"origin", vec_json(meta.origin)},
            {"palette", palette}};
}

json error_message(const std::string& reason)
{
    json e = typed("error");
    e["reason"] = reason;
    return e;
}

RenderedFrame render_session_frame(SessionState& state, const VolumeEntry& volume, FrameCache* cache,
                                   const RenderCostHook& cost_hook)
{
    const double scale = state.controller.scale();
    const VolumeMeta& meta = volume.color.meta();
    const auto started = std::chrono::steady_clock::now();

    std::vector<SliceImage> images;
    if (state.mode == ProbeMode::Plane) {
        images.push_back(render_plane_slice(state.plane, volume.color, volume.label_ptr(), scale));
    } else {
        auto faces = render_box_faces(state.box, volume.color, volume.label_ptr(), scale);
        images.assign(std::make_move_iterator(faces.begin()), std::make_move_iterator(faces.end()));
    }

    HighlightParams highlight = state.highlight;
    highlight.selected.assign(state.highlighted.begin(), state.highlighted.end());
    for (auto& img : images) {
        apply_visibility(img, state.hidden);
        if (!highlight.selected.empty()) {
            img = apply_highlight(img, highlight);
        }
    }

    json items = state.mode == ProbeMode::Plane ? annotate_image(images.front(), meta, scale) : json::array();

    json image_list = json::array();
    for (std::size_t n = 0; n < images.size(); ++n) {
        json im = image_json(images[n]);
        if (state.mode == ProbeMode::Box) {
            im["face"] = box_face_name(kBoxFaces[n]);
        }
        image_list.push_back(std::move(im));
    }

    const double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    const double cost_ms = cost_hook ? cost_hook(scale) : wall_ms;
    state.controller.update(cost_ms);
    const std::uint64_t seq = ++state.seq;

    RenderedFrame out;
    out.frame = typed("frame");
    out.frame["seq"] = seq;
    out.frame["scale"] = scale;
    out.frame["mode"] = mode_name(state.mode);
    out.frame["images"] = std::move(image_list);
    if (state.mode == ProbeMode::Plane) {
        out.frame["geometry"] = slice_geometry_json(images.front().geometry);
    } else {
        json basis = json::array();
        for (const auto& a : state.box.axes) {
            basis.push_back(a.x);
            basis.push_back(a.y);
            basis.push_back(a.z);
        }
        out.frame["geometry"] = {{"center", vec_json(state.box.center)},
                                 {"basis", basis},
                                 {"extents", state.box.extents},
                                 {"face_res", state.box.face_res},
                                 {"scale", scale}};
    }
    out.frame["render_ms"] = cost_ms;
    out.annotations = typed("annotations");
    out.annotations["seq"] = seq;
    out.annotations["items"] = std::move(items);

    if (cache != nullptr) {
        cache->mode = state.mode;
        cache->plane = state.plane;
        cache->box = state.box;
        cache->images = std::move(images);
    }
    return out;
}

Session::Session(std::shared_ptr<const VolumeCatalog> catalog) : catalog_(std::move(catalog)) {}

std::vector<std::string> Session::handle_text(std::string_view text)
{
    std::vector<json> replies;
    if (text.size() > kMaxMessageBytes) {
        replies.push_back(error_message("message exceeds " + std::to_string(kMaxMessageBytes) + " bytes"));
    } else {
        json msg = json::parse(text, nullptr, false);
        if (msg.is_discarded()) {
            replies.push_back(error_message("malformed JSON"));
        } else {
            replies = handle_message(msg);
        }
    }
    std::vector<std::string> out;
    out.reserve(replies.size());
    for (const auto& r : replies) {
        out.push_back(r.dump());
    }
    return out;
}

std::vector<json> Session::handle_message(const json& msg)
{
    if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
        return {error_message("message must be an object with a string 'type'")};
    }
    const std::string type = msg["type"].get<std::string>();
    try {
        if (type == "hello") {
            return on_hello(msg);
        }
        const bool known = type == "set_plane" || type == "set_box" || type == "set_mode" || type == "pick" ||
                           type == "command";
        if (!known) {
            return {error_message("unknown message type '" + type + "'")};
        }
        if (!established()) {
            return {error_message("no volume selected; send hello first")};
        }
        if (type == "set_plane") {
            return on_set_plane(msg);
        }
        if (type == "set_box") {
            return on_set_box(msg);
        }
        if (type == "set_mode") {
            return on_set_mode(msg);
        }
        if (type == "pick") {
            return on_pick(msg);
        }
        return on_command(msg);
    } catch (const ProtocolError& e) {
        return {error_message(e.what())};
    } catch (const std::domain_error& e) {
        return {error_message(e.what())};
    }
}

std::vector<json> Session::on_hello(const json& msg)
{
    const json& v = field(msg, "volume");
    if (!v.is_string()) {
        throw ProtocolError("field 'volume' must be a string");
    }
    const VolumeEntry* entry = catalog_->find(v.get<std::string>());
    if (entry == nullptr) {
        return {error_message("unknown volume '" + v.get<std::string>() + "'")};
    }
    volume_ = entry;
    state_ = default_session(entry->color.meta());
    cache_valid_ = false;

    json reply = typed("hello");
    reply["volume"] = entry->id;
    reply.update(meta_json(entry->color.meta()));
    reply["has_labels"] = entry->labels.has_value();
    return {reply};
}

std::vector<json> Session::frame_replies()
{
    RenderedFrame f = render_session_frame(state_, *volume_, &cache_, cost_hook_);
    cache_valid_ = true;
    return {std::move(f.frame), std::move(f.annotations)};
}

std::vector<json> Session::on_set_plane(const json& msg)
{
    PlaneSlicer p;
    p.center = vec3(msg, "center");
    p.u = vec3(msg, "u");
    p.v = vec3(msg, "v");
    p.hu = number(msg, "hu");
    p.hv = number(msg, "hv");
    p.width = resolution(msg, "w");
    p.height = resolution(msg, "h");
    if (!orthonormalize_pair(p.u, p.v, kBasisRepairTolerance)) {
        throw ProtocolError("u, v are not orthonormal within 1e-3");
    }
    p.validate();
    state_.plane = p;
    state_.mode = ProbeMode::Plane;
    return frame_replies();
}

std::vector<json> Session::on_set_box(const json& msg)
{
    BoxSlicer b;
    b.center = vec3(msg, "center");
    const auto basis = numbers(msg, "basis", 9);
    for (std::size_t r = 0; r < 3; ++r) {
        b.axes[r] = {basis[3 * r], basis[3 * r + 1], basis[3 * r + 2]};
    }
    const auto ext = numbers(msg, "extents", 3);
    b.extents = {ext[0], ext[1], ext[2]};
    b.face_res = resolution(msg, "face_res");
    if (!orthonormalize_frame(b.axes, kBasisRepairTolerance)) {
        throw ProtocolError("basis is not a right-handed orthonormal frame within 1e-3");
    }
    b.validate();
    state_.box = b;
    state_.mode = ProbeMode::Box;
    return frame_replies();
}

std::vector<json> Session::on_set_mode(const json& msg)
{
    const json& m = field(msg, "mode");
    if (!m.is_string() || (m != "plane" && m != "box")) {
        throw ProtocolError("field 'mode' must be \"plane\" or \"box\"");
    }
    state_.mode = m == "plane" ? ProbeMode::Plane : ProbeMode::Box;
    return frame_replies();
}

std::vector<json> Session::on_pick(const json& msg)
{
    Ray ray{vec3(msg, "origin"), vec3(msg, "dir")};
    if (!(norm(ray.direction) > 0)) {
        throw ProtocolError("field 'dir' must be non-zero");
    }
    const bool stale = !cache_valid_ || cache_.mode != state_.mode ||
                       (state_.mode == ProbeMode::Plane ? !(cache_.plane == state_.plane) : !(cache_.box == state_.box));
    if (stale) {
        // Picks read what the client was shown; render without advancing the frame sequence.
        SessionState scratch = state_;
        render_session_frame(scratch, *volume_, &cache_, [](double) { return 0.0; });
        cache_valid_ = true;
    }

    std::optional<PickResult> best;
    std::optional<std::size_t> best_face;
    double best_t = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < cache_.images.size(); ++n) {
        const PlaneSlicer plane =
            cache_.mode == ProbeMode::Plane ? cache_.plane : box_face_plane(cache_.box, kBoxFaces[n]);
        const auto hit = pick_plane(ray, plane, cache_.images[n], volume_->color.meta().palette);
        if (!hit) {
            continue;
        }
        const double t = norm(hit->world - ray.origin);
        if (t < best_t) {
            best_t = t;
            best = hit;
            best_face = n;
        }
    }

    json reply = typed("pick_result");
    reply["hit"] = best.has_value();
    if (best) {
        reply["world"] = vec_json(best->world);
        reply["pixel"] = {best->i, best->j};
        reply["id"] = best->label_id;
        reply["name"] = best->name;
        if (cache_.mode == ProbeMode::Box) {
            reply["face"] = box_face_name(kBoxFaces[*best_face]);
        }
    }
    return {reply};
}

std::vector<json> Session::on_command(const json& msg)
{
    const json& t = field(msg, "text");
    if (!t.is_string()) {
        throw ProtocolError("field 'text' must be a string");
    }
    const ParseResult parsed = parse_command(t.get<std::string>());
    json reply = typed("command_result");
    if (const auto* err = std::get_if<ParseError>(&parsed)) {
        reply["ok"] = false;
        reply["message"] = err->message();
        reply["error"] = {{"position", err->position}, {"expected", err->expected}, {"found", err->found}};
        return {reply};
    }
    CommandOutcome outcome =
        apply_command(std::get<CommandAst>(parsed), state_, volume_->color.meta(), volume_->synonyms);
    reply["ok"] = outcome.ok;
    reply["message"] = outcome.message;
    if (!outcome.ok || !outcome.changed) {
        return {reply};
    }
    state_ = std::move(outcome.state);
    std::vector<json> out{reply};
    for (auto& m : frame_replies()) {
        out.push_back(std::move(m));
    }
    return out;
}

} // namespace vhs
