// Copyright 2026 The einstall Authors
// SPDX-License-Identifier: Apache-2.0

// Scene manifests: the declarative description of a virtualized artwork, its validation,
// the built-in fixtures for the two case-study works, and the curation decision rule that
// chooses a modeling fidelity from an artwork assessment.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "einstall/core.hpp"
#include "einstall/json_util.hpp"
#include "einstall/media.hpp"

namespace einstall {

enum class NodeKind { static_mesh, neon_element, media_surface };

inline std::string_view to_string(NodeKind k) {
    switch (k) {
        case NodeKind::static_mesh: return "static_mesh";
        case NodeKind::neon_element: return "neon_element";
        case NodeKind::media_surface: return "media_surface";
    }
    return "static_mesh";
}

/// What a media surface displays: a looping video channel or whatever a projector casts.
struct Binding {
    enum class Target { channel, projector };
    Target target = Target::channel;
    std::string id;

    friend bool operator==(const Binding&, const Binding&) = default;
};

struct SceneNode {
    std::string node_id;
    NodeKind kind = NodeKind::static_mesh;
    Pose pose;
    Vec3 extent;  // bounding-box half sizes
    std::optional<std::string> mesh_asset;
    std::optional<Binding> binding;

    friend bool operator==(const SceneNode&, const SceneNode&) = default;
};

struct CapsuleKey {
    std::string city_id;
    std::string slot;

    friend bool operator==(const CapsuleKey&, const CapsuleKey&) = default;
    friend auto operator<=>(const CapsuleKey&, const CapsuleKey&) = default;
};

using PlaylistRef = std::variant<CapsuleKey, std::vector<MediaItem>>;

struct VideoChannel {
    std::string channel_id;
    PlaylistRef playlist;
    double fps = 25.0;
    bool loop = true;
    double delay_offset = 0.0;

    friend bool operator==(const VideoChannel&, const VideoChannel&) = default;
};

struct Projector {
    std::string projector_id;
    std::vector<std::string> target_surface_ids;
    std::string slot;

    friend bool operator==(const Projector&, const Projector&) = default;
};

struct SpeakerSource {
    enum class Kind { channel, slot };
    Kind kind = Kind::channel;
    std::string id;

    friend bool operator==(const SpeakerSource&, const SpeakerSource&) = default;
};

struct Speaker {
    std::string speaker_id;
    Vec3 position;
    SpeakerSource source;
    double reference_gain = 1.0;
    double reference_distance = 1.0;

    friend bool operator==(const Speaker&, const Speaker&) = default;
};

struct CityOption {
    std::string city_id;
    std::string label;

    friend bool operator==(const CityOption&, const CityOption&) = default;
};

struct MenuWidget {
    std::string widget_id;
    Pose pose;
    std::vector<CityOption> options;
    std::vector<std::string> driven_slots;

    friend bool operator==(const MenuWidget&, const MenuWidget&) = default;
};

enum class EnvironmentKind { none, panorama, modeled };

struct Environment {
    EnvironmentKind kind = EnvironmentKind::none;
    std::string asset;  // empty for none

    friend bool operator==(const Environment&, const Environment&) = default;
};

struct SceneManifest {
    std::string scene_id;
    std::string title;
    std::string artist;
    Environment environment;
    std::vector<SceneNode> nodes;
    std::vector<VideoChannel> channels;
    std::vector<Projector> projectors;
    std::vector<Speaker> speakers;
    std::vector<MenuWidget> widgets;

    friend bool operator==(const SceneManifest&, const SceneManifest&) = default;

    [[nodiscard]] const VideoChannel* find_channel(std::string_view id) const {
        for (const auto& c : channels)
            if (c.channel_id == id) return &c;
        return nullptr;
    }
    [[nodiscard]] const Projector* find_projector(std::string_view id) const {
        for (const auto& p : projectors)
            if (p.projector_id == id) return &p;
        return nullptr;
    }
    [[nodiscard]] const SceneNode* find_node(std::string_view id) const {
        for (const auto& n : nodes)
            if (n.node_id == id) return &n;
        return nullptr;
    }
    [[nodiscard]] bool has_slot(std::string_view slot) const {
        return std::any_of(projectors.begin(), projectors.end(), [&](const Projector& p) { return p.slot == slot; });
    }
    [[nodiscard]] std::size_t count_nodes(NodeKind kind) const {
        return static_cast<std::size_t>(
            std::count_if(nodes.begin(), nodes.end(), [&](const SceneNode& n) { return n.kind == kind; }));
    }
};

// ---------------------------------------------------------------------------------------
// Validation

struct Violation {
    enum class Kind { schema, duplicate, dangling_reference };
    Kind kind = Kind::schema;
    std::string path;
    std::string message;
    std::string ref;  // offending id for dangling references

    friend bool operator==(const Violation&, const Violation&) = default;
};

namespace detail {

class ViolationSink {
  public:
    void schema(std::string path, std::string message) {
        out_.push_back({Violation::Kind::schema, std::move(path), std::move(message), {}});
    }
    void duplicate(std::string path, const std::string& id) {
        out_.push_back({Violation::Kind::duplicate, std::move(path), "duplicate id \"" + id + "\"", id});
    }
    void dangling(std::string path, const std::string& what, const std::string& id) {
        out_.push_back(
            {Violation::Kind::dangling_reference, std::move(path), "unknown " + what + " \"" + id + "\"", id});
    }
    std::vector<Violation> take() { return std::move(out_); }

  private:
    std::vector<Violation> out_;
};

inline void check_unique(ViolationSink& sink, std::set<std::string>& seen, const std::string& path,
                         const std::string& id) {
    if (id.empty()) {
        sink.schema(path, "id must be non-empty");
        return;
    }
    if (!seen.insert(id).second) sink.duplicate(path, id);
}

inline void check_pose(ViolationSink& sink, const std::string& path, const Pose& pose) {
    if (!pose.position.finite()) sink.schema(path + ".position", "position must be finite");
    if (!yaw_in_range(pose.yaw)) sink.schema(path + ".yaw", "yaw must lie in [-pi, pi)");
}

}  // namespace detail

/// Checks every manifest invariant. Violations come back in document order (top-level
/// keys in schema order, array elements by index), so the list is deterministic.
inline std::vector<Violation> validate_manifest(const SceneManifest& m) {
    detail::ViolationSink sink;
    using detail::check_pose;
    using detail::check_unique;

    if (m.scene_id.empty()) sink.schema("scene_id", "scene_id must be non-empty");
    if (m.environment.kind != EnvironmentKind::none && m.environment.asset.empty())
        sink.schema("environment.asset", "asset required for panorama and modeled environments");
    if (m.environment.kind == EnvironmentKind::none && !m.environment.asset.empty())
        sink.schema("environment.asset", "asset must be absent for environment kind none");

    if (m.nodes.empty()) sink.schema("nodes", "nodes must be non-empty");
    std::set<std::string> node_ids;
    for (std::size_t i = 0; i < m.nodes.size(); ++i) {
        const auto& n = m.nodes[i];
        const std::string p = indexed("nodes", i);
        check_unique(sink, node_ids, p + ".node_id", n.node_id);
        check_pose(sink, p + ".pose", n.pose);
        if (!n.extent.finite() || n.extent.x < 0 || n.extent.y < 0 || n.extent.z < 0)
            sink.schema(p + ".extent", "extent must be finite and non-negative");
        if (n.kind == NodeKind::media_surface) {
            if (!n.binding) {
                sink.schema(p + ".binding", "media_surface requires a binding");
            } else if (n.binding->target == Binding::Target::channel) {
                if (!m.find_channel(n.binding->id)) sink.dangling(p + ".binding", "channel", n.binding->id);
            } else {
                const Projector* proj = m.find_projector(n.binding->id);
                if (!proj) {
                    sink.dangling(p + ".binding", "projector", n.binding->id);
                } else if (std::find(proj->target_surface_ids.begin(), proj->target_surface_ids.end(), n.node_id) ==
                           proj->target_surface_ids.end()) {
                    sink.schema(p + ".binding", "projector \"" + proj->projector_id + "\" does not target this surface");
                }
            }
        } else if (n.binding) {
            sink.schema(p + ".binding", std::string(to_string(n.kind)) + " must not carry a binding");
        }
    }

    std::set<std::string> channel_ids;
    for (std::size_t i = 0; i < m.channels.size(); ++i) {
        const auto& c = m.channels[i];
        const std::string p = indexed("channels", i);
        check_unique(sink, channel_ids, p + ".channel_id", c.channel_id);
        if (const auto* items = std::get_if<std::vector<MediaItem>>(&c.playlist)) {
            if (items->empty()) sink.schema(p + ".playlist.items", "playlist must be non-empty");
            for (std::size_t k = 0; k < items->size(); ++k) {
                const std::string problem = media_item_problem((*items)[k]);
                if (!problem.empty()) sink.schema(indexed(p + ".playlist.items", k), problem);
            }
        } else {
            const auto& key = std::get<CapsuleKey>(c.playlist);
            if (key.city_id.empty() || key.slot.empty())
                sink.schema(p + ".playlist.capsule", "capsule key needs city_id and slot");
        }
        if (!(std::isfinite(c.fps) && c.fps > 0.0)) sink.schema(p + ".fps", "fps must be > 0");
        if (!(std::isfinite(c.delay_offset) && c.delay_offset >= 0.0))
            sink.schema(p + ".delay_offset", "delay_offset must be finite and >= 0");
    }

    std::set<std::string> projector_ids;
    for (std::size_t i = 0; i < m.projectors.size(); ++i) {
        const auto& pr = m.projectors[i];
        const std::string p = indexed("projectors", i);
        check_unique(sink, projector_ids, p + ".projector_id", pr.projector_id);
        if (pr.target_surface_ids.empty()) sink.schema(p + ".target_surface_ids", "at least one target required");
        for (std::size_t k = 0; k < pr.target_surface_ids.size(); ++k) {
            const std::string& target = pr.target_surface_ids[k];
            const SceneNode* node = m.find_node(target);
            if (!node)
                sink.dangling(indexed(p + ".target_surface_ids", k), "node", target);
            else if (node->kind != NodeKind::media_surface)
                sink.schema(indexed(p + ".target_surface_ids", k), "target \"" + target + "\" is not a media_surface");
        }
        if (pr.slot.empty()) sink.schema(p + ".slot", "slot must be non-empty");
    }

    std::set<std::string> speaker_ids;
    for (std::size_t i = 0; i < m.speakers.size(); ++i) {
        const auto& s = m.speakers[i];
        const std::string p = indexed("speakers", i);
        check_unique(sink, speaker_ids, p + ".speaker_id", s.speaker_id);
        if (!s.position.finite()) sink.schema(p + ".position", "position must be finite");
        if (s.source.kind == SpeakerSource::Kind::channel) {
            if (!m.find_channel(s.source.id)) sink.dangling(p + ".source", "channel", s.source.id);
        } else if (!m.has_slot(s.source.id)) {
            sink.dangling(p + ".source", "slot", s.source.id);
        }
        if (!(s.reference_gain > 0.0 && s.reference_gain <= 1.0))
            sink.schema(p + ".reference_gain", "reference_gain must lie in (0, 1]");
        if (!(std::isfinite(s.reference_distance) && s.reference_distance > 0.0))
            sink.schema(p + ".reference_distance", "reference_distance must be > 0");
    }

    std::set<std::string> widget_ids;
    for (std::size_t i = 0; i < m.widgets.size(); ++i) {
        const auto& w = m.widgets[i];
        const std::string p = indexed("widgets", i);
        check_unique(sink, widget_ids, p + ".widget_id", w.widget_id);
        check_pose(sink, p + ".pose", w.pose);
        if (w.options.empty()) sink.schema(p + ".options", "options must be non-empty");
        std::set<std::string> cities;
        for (std::size_t k = 0; k < w.options.size(); ++k)
            check_unique(sink, cities, indexed(p + ".options", k) + ".city_id", w.options[k].city_id);
        if (w.driven_slots.empty()) sink.schema(p + ".driven_slots", "driven_slots must be non-empty");
        for (std::size_t k = 0; k < w.driven_slots.size(); ++k)
            if (!m.has_slot(w.driven_slots[k]))
                sink.dangling(indexed(p + ".driven_slots", k), "slot", w.driven_slots[k]);
    }
    return sink.take();
}

// ---------------------------------------------------------------------------------------
// JSON form

inline OJson manifest_to_json(const SceneManifest& m) {
    OJson j = OJson::object();
    j["scene_id"] = m.scene_id;
    j["title"] = m.title;
    j["artist"] = m.artist;
    OJson env = OJson::object();
    switch (m.environment.kind) {
        case EnvironmentKind::none: env["kind"] = "none"; break;
        case EnvironmentKind::panorama: env["kind"] = "panorama"; break;
        case EnvironmentKind::modeled: env["kind"] = "modeled"; break;
    }
    if (m.environment.kind != EnvironmentKind::none) env["asset"] = m.environment.asset;
    j["environment"] = env;

    OJson nodes = OJson::array();
    for (const auto& n : m.nodes) {
        OJson o = OJson::object();
        o["node_id"] = n.node_id;
        o["kind"] = to_string(n.kind);
        o["pose"] = pose_to_json(n.pose);
        o["extent"] = vec3_to_json(n.extent);
        o["mesh_asset"] = n.mesh_asset ? OJson(*n.mesh_asset) : OJson(nullptr);
        if (n.binding) {
            OJson b = OJson::object();
            b[n.binding->target == Binding::Target::channel ? "channel" : "projector"] = n.binding->id;
            o["binding"] = b;
        } else {
            o["binding"] = nullptr;
        }
        nodes.push_back(std::move(o));
    }
    j["nodes"] = std::move(nodes);

    OJson channels = OJson::array();
    for (const auto& c : m.channels) {
        OJson o = OJson::object();
        o["channel_id"] = c.channel_id;
        OJson pl = OJson::object();
        if (const auto* key = std::get_if<CapsuleKey>(&c.playlist)) {
            OJson k = OJson::object();
            k["city_id"] = key->city_id;
            k["slot"] = key->slot;
            pl["capsule"] = k;
        } else {
            OJson items = OJson::array();
            for (const auto& item : std::get<std::vector<MediaItem>>(c.playlist))
                items.push_back(media_item_to_json(item));
            pl["items"] = std::move(items);
        }
        o["playlist"] = std::move(pl);
        o["fps"] = c.fps;
        o["loop"] = c.loop;
        o["delay_offset"] = c.delay_offset;
        channels.push_back(std::move(o));
    }
    j["channels"] = std::move(channels);

    OJson projectors = OJson::array();
    for (const auto& p : m.projectors) {
        OJson o = OJson::object();
        o["projector_id"] = p.projector_id;
        o["target_surface_ids"] = p.target_surface_ids;
        o["slot"] = p.slot;
        projectors.push_back(std::move(o));
    }
    j["projectors"] = std::move(projectors);

    OJson speakers = OJson::array();
    for (const auto& s : m.speakers) {
        OJson o = OJson::object();
        o["speaker_id"] = s.speaker_id;
        o["position"] = vec3_to_json(s.position);
        OJson src = OJson::object();
        src[s.source.kind == SpeakerSource::Kind::channel ? "channel" : "slot"] = s.source.id;
        o["source"] = src;
        o["reference_gain"] = s.reference_gain;
        o["reference_distance"] = s.reference_distance;
        speakers.push_back(std::move(o));
    }
    j["speakers"] = std::move(speakers);

    OJson widgets = OJson::array();
    for (const auto& w : m.widgets) {
        OJson o = OJson::object();
        o["widget_id"] = w.widget_id;
        o["pose"] = pose_to_json(w.pose);
        OJson options = OJson::array();
        for (const auto& opt : w.options) {
            OJson c = OJson::object();
            c["city_id"] = opt.city_id;
            c["label"] = opt.label;
            options.push_back(std::move(c));
        }
        o["options"] = std::move(options);
        o["driven_slots"] = w.driven_slots;
        widgets.push_back(std::move(o));
    }
    j["widgets"] = std::move(widgets);
    return j;
}

/// Canonical text: 2-space indentation, schema key order, trailing LF.
inline std::string serialize_manifest(const SceneManifest& m) { return manifest_to_json(m).dump(2) + "\n"; }

namespace detail {

inline std::vector<std::string> string_list(const Json& arr, const std::string& path) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_string()) throw Error(ErrorCode::schema, indexed(path, i) + ": expected string");
        out.push_back(arr[i].get<std::string>());
    }
    return out;
}

/// Single-key object {"<a>": id} or {"<b>": id}; returns (true for a, id).
inline std::pair<bool, std::string> either_ref(const Json& j, const std::string& path, std::string_view a,
                                               std::string_view b) {
    ObjectReader r(j, path, {a, b});
    if (r.has(a) == r.has(b))
        throw Error(ErrorCode::schema, path + ": expected exactly one of \"" + std::string(a) + "\", \"" +
                                           std::string(b) + "\"");
    return r.has(a) ? std::pair{true, r.str(a)} : std::pair{false, r.str(b)};
}

inline SceneManifest manifest_structure(const Json& doc) {
    ObjectReader top(doc, "",
                     {"scene_id", "title", "artist", "environment", "nodes", "channels", "projectors", "speakers",
                      "widgets"});
    SceneManifest m;
    m.scene_id = top.str("scene_id");
    m.title = top.str("title");
    m.artist = top.str("artist");

    ObjectReader env(top.at("environment"), "environment", {"kind", "asset"});
    const std::string kind = env.str("kind");
    if (kind == "none")
        m.environment.kind = EnvironmentKind::none;
    else if (kind == "panorama")
        m.environment.kind = EnvironmentKind::panorama;
    else if (kind == "modeled")
        m.environment.kind = EnvironmentKind::modeled;
    else
        throw Error(ErrorCode::schema, "environment.kind: expected one of none, panorama, modeled");
    m.environment.asset = env.opt_str("asset").value_or("");

    const Json& nodes = top.array("nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string p = indexed("nodes", i);
        ObjectReader r(nodes[i], p, {"node_id", "kind", "pose", "extent", "mesh_asset", "binding"});
        SceneNode n;
        n.node_id = r.str("node_id");
        const std::string k = r.str("kind");
        if (k == "static_mesh")
            n.kind = NodeKind::static_mesh;
        else if (k == "neon_element")
            n.kind = NodeKind::neon_element;
        else if (k == "media_surface")
            n.kind = NodeKind::media_surface;
        else
            throw Error(ErrorCode::schema, r.child("kind") + ": expected one of static_mesh, neon_element, media_surface");
        n.pose = pose_from_json(r.at("pose"), r.child("pose"));
        n.extent = vec3_from_json(r.at("extent"), r.child("extent"));
        n.mesh_asset = r.opt_str("mesh_asset");
        if (r.has("binding") && !r.at("binding").is_null()) {
            auto [is_channel, id] = either_ref(r.at("binding"), r.child("binding"), "channel", "projector");
            n.binding = Binding{is_channel ? Binding::Target::channel : Binding::Target::projector, id};
        }
        m.nodes.push_back(std::move(n));
    }

    const Json& channels = top.array("channels");
    for (std::size_t i = 0; i < channels.size(); ++i) {
        const std::string p = indexed("channels", i);
        ObjectReader r(channels[i], p, {"channel_id", "playlist", "fps", "loop", "delay_offset"});
        VideoChannel c;
        c.channel_id = r.str("channel_id");
        ObjectReader pl(r.at("playlist"), r.child("playlist"), {"capsule", "items"});
        if (pl.has("capsule") == pl.has("items"))
            throw Error(ErrorCode::schema, pl.path() + ": expected exactly one of \"capsule\", \"items\"");
        if (pl.has("capsule")) {
            ObjectReader key(pl.at("capsule"), pl.child("capsule"), {"city_id", "slot"});
            c.playlist = CapsuleKey{key.str("city_id"), key.str("slot")};
        } else {
            const Json& items = pl.array("items");
            std::vector<MediaItem> list;
            for (std::size_t k = 0; k < items.size(); ++k)
                list.push_back(media_item_from_json(items[k], indexed(pl.child("items"), k)));
            c.playlist = std::move(list);
        }
        c.fps = r.num("fps");
        c.loop = r.boolean("loop");
        c.delay_offset = r.num("delay_offset");
        m.channels.push_back(std::move(c));
    }

    const Json& projectors = top.array("projectors");
    for (std::size_t i = 0; i < projectors.size(); ++i) {
        ObjectReader r(projectors[i], indexed("projectors", i), {"projector_id", "target_surface_ids", "slot"});
        m.projectors.push_back(
            {r.str("projector_id"), string_list(r.array("target_surface_ids"), r.child("target_surface_ids")),
             r.str("slot")});
    }

    const Json& speakers = top.array("speakers");
    for (std::size_t i = 0; i < speakers.size(); ++i) {
        ObjectReader r(speakers[i], indexed("speakers", i),
                       {"speaker_id", "position", "source", "reference_gain", "reference_distance"});
        Speaker s;
        s.speaker_id = r.str("speaker_id");
        s.position = vec3_from_json(r.at("position"), r.child("position"));
        auto [is_channel, id] = either_ref(r.at("source"), r.child("source"), "channel", "slot");
        s.source = {is_channel ? SpeakerSource::Kind::channel : SpeakerSource::Kind::slot, id};
        s.reference_gain = r.num("reference_gain");
        s.reference_distance = r.num("reference_distance");
        m.speakers.push_back(std::move(s));
    }

    const Json& widgets = top.array("widgets");
    for (std::size_t i = 0; i < widgets.size(); ++i) {
        ObjectReader r(widgets[i], indexed("widgets", i), {"widget_id", "pose", "options", "driven_slots"});
        MenuWidget w;
        w.widget_id = r.str("widget_id");
        w.pose = pose_from_json(r.at("pose"), r.child("pose"));
        const Json& options = r.array("options");
        for (std::size_t k = 0; k < options.size(); ++k) {
            ObjectReader o(options[k], indexed(r.child("options"), k), {"city_id", "label"});
            w.options.push_back({o.str("city_id"), o.str("label")});
        }
        w.driven_slots = string_list(r.array("driven_slots"), r.child("driven_slots"));
        m.widgets.push_back(std::move(w));
    }
    return m;
}

}  // namespace detail

/// Structural parse only (syntax and field types); invariants are left to validate_manifest.
inline SceneManifest parse_manifest_structure(std::string_view text) {
    return detail::manifest_structure(parse_json_text(text));
}

/// Parses and fully validates a manifest document. Throws Error with code syntax (byte
/// position), schema (field path) or dangling_reference (offending id).
inline SceneManifest parse_manifest(std::string_view text) {
    const Json doc = parse_json_text(text);
    SceneManifest m = detail::manifest_structure(doc);
    const auto violations = validate_manifest(m);
    if (!violations.empty()) {
        const Violation& v = violations.front();
        if (v.kind == Violation::Kind::dangling_reference)
            throw Error(ErrorCode::dangling_reference, v.path + ": " + v.message);
        throw Error(ErrorCode::schema, v.path + ": " + v.message);
    }
    return m;
}

inline SceneManifest load_manifest(const std::filesystem::path& path) { return parse_manifest(read_file(path)); }

// ---------------------------------------------------------------------------------------
// Curation

enum class Level { low, medium, high };
enum class MaterialMeaningLink { none, essential };

struct AssessmentRecord {
    Level relevance = Level::medium;      // (a)
    Level vulnerability = Level::medium;  // (b)
    bool documentation_available = true;  // (c)
    bool technically_viable = true;       // (d)
    bool conceptually_suitable = true;    // (e)
    MaterialMeaningLink material_meaning_link = MaterialMeaningLink::none;
};

enum class GeometryFidelity { structural, photogrammetric };
enum class TextureFidelity { flat, sensor_derived };

struct FidelityPlan {
    GeometryFidelity geometry = GeometryFidelity::structural;
    TextureFidelity textures = TextureFidelity::flat;
    EnvironmentKind environment = EnvironmentKind::panorama;

    friend bool operator==(const FidelityPlan&, const FidelityPlan&) = default;
};

/// Chooses how faithfully an artwork is modeled. Criteria (c) to (e) must hold; when the
/// material conditions carry no meaning, the basic structure suffices, otherwise textures and
/// photogrammetry are required.
inline FidelityPlan recommend_fidelity(const AssessmentRecord& a) {
    auto fail = [](std::string_view which) {
        throw Error(ErrorCode::insufficient_basis, "insufficient basis for virtualization: criterion " +
                                                       std::string(which) + " not met");
    };
    if (!a.documentation_available) fail("(c) documentation_available");
    if (!a.technically_viable) fail("(d) technically_viable");
    if (!a.conceptually_suitable) fail("(e) conceptually_suitable");
    if (a.material_meaning_link == MaterialMeaningLink::none)
        return {GeometryFidelity::structural, TextureFidelity::flat, EnvironmentKind::panorama};
    return {GeometryFidelity::photogrammetric, TextureFidelity::sensor_derived, EnvironmentKind::panorama};
}

// ---------------------------------------------------------------------------------------
// Built-in fixtures

struct BuiltinOptions {
    double vf_channel_b_delay = 0.0;
    bool vf_shared_playlist = false;  // both circuits play channel A's file
};

namespace detail {

inline std::vector<MediaItem> vf_tape(std::string id, double duration) {
    MediaItem m{std::move(id), MediaKind::video, duration, 25.0, 0, ""};
    m.frame_count = expected_frame_count(m.duration, m.fps);
    m.uri = "media/" + m.media_id;
    return {m};
}

inline SceneManifest versailles_fountain(const BuiltinOptions& opts) {
    SceneManifest m;
    m.scene_id = "vf";
    m.title = "Versailles Fountain";
    m.artist = "Nam June Paik";
    m.environment = {EnvironmentKind::panorama, "assets/vf/zkm_panorama.jpg"};

    const Vec3 center{4.0, 0.0, 0.0};
    m.nodes.push_back({"body", NodeKind::static_mesh, {center, 0.0}, {0.9, 0.9, 1.2}, "assets/vf/body.obj", std::nullopt});
    m.nodes.push_back({"pinecone", NodeKind::static_mesh, {center + Vec3{0, 0, 2.6}, 0.0}, {0.3, 0.3, 0.4},
                       "assets/vf/pinecone_sfm.obj", std::nullopt});

    // Monitors sit on four stepped tiers around the body, alternating circuits.
    const int tier_counts[] = {12, 10, 9, 7};
    const double tier_radius[] = {1.10, 0.95, 0.80, 0.60};
    const double tier_height[] = {0.4, 1.0, 1.6, 2.1};
    int monitor = 0;
    for (int t = 0; t < 4; ++t) {
        for (int k = 0; k < tier_counts[t]; ++k) {
            const double angle = wrap_angle(kTwoPi * k / tier_counts[t] + 0.25 * t);
            const Vec3 pos = center + Vec3{tier_radius[t] * std::cos(angle), tier_radius[t] * std::sin(angle),
                                           tier_height[t]};
            char id[16];
            std::snprintf(id, sizeof id, "crt_%02d", monitor + 1);
            const std::string channel = monitor % 2 == 0 ? "A" : "B";
            m.nodes.push_back({id, NodeKind::media_surface, {pos, angle}, {0.25, 0.22, 0.2}, "assets/vf/crt.obj",
                               Binding{Binding::Target::channel, channel}});
            ++monitor;
        }
    }
    for (int k = 0; k < 20; ++k) {
        const double angle = wrap_angle(kTwoPi * k / 10.0 + (k >= 10 ? kPi / 10.0 : 0.0));
        const double radius = k < 10 ? 1.25 : 0.7;
        const double height = k < 10 ? 0.15 : 2.35;
        char id[16];
        std::snprintf(id, sizeof id, "neon_%02d", k + 1);
        m.nodes.push_back({id, NodeKind::neon_element,
                           {center + Vec3{radius * std::cos(angle), radius * std::sin(angle), height}, angle},
                           {0.05, 0.05, 0.3}, "assets/vf/neon_tube.obj", std::nullopt});
    }

    const auto tape_a = vf_tape("vf_circuit_a.mp4", 600.0);
    m.channels.push_back({"A", tape_a, 25.0, true, 0.0});
    m.channels.push_back(
        {"B", opts.vf_shared_playlist ? tape_a : vf_tape("vf_circuit_b.mp4", 540.0), 25.0, true,
         opts.vf_channel_b_delay});

    m.speakers.push_back({"spk_a", center + Vec3{-1.5, 1.0, 1.0}, {SpeakerSource::Kind::channel, "A"}, 0.8, 1.5});
    m.speakers.push_back({"spk_b", center + Vec3{-1.5, -1.0, 1.0}, {SpeakerSource::Kind::channel, "B"}, 0.8, 1.5});
    return m;
}

inline SceneManifest moving_cities() {
    SceneManifest m;
    m.scene_id = "mc";
    m.title = "10,000 Moving Cities - Same but Different";
    m.artist = "Marc Lee";
    m.environment = {EnvironmentKind::modeled, "assets/mc/imaginary_landscape.obj"};

    const Vec3 cube_pos[] = {{3.0, -2.0, 1.0}, {3.0, 2.0, 1.0}, {6.0, -2.0, 1.0}, {6.0, 2.0, 1.0}};
    for (int i = 0; i < 4; ++i) {
        const std::string n = std::to_string(i + 1);
        m.nodes.push_back({"cube_" + n, NodeKind::media_surface, {cube_pos[i], 0.0}, {1.0, 1.0, 1.0},
                           "assets/mc/cube.obj", Binding{Binding::Target::projector, "projector_" + n}});
    }
    m.nodes.push_back({"menu_stand", NodeKind::static_mesh, {{1.5, 0.0, 0.0}, 0.0}, {0.3, 0.3, 0.6},
                       "assets/mc/stand.obj", std::nullopt});

    const Vec3 speaker_pos[] = {{1.5, -3.5, 1.8}, {1.5, 3.5, 1.8}, {7.5, -3.5, 1.8}, {7.5, 3.5, 1.8}};
    for (int i = 0; i < 4; ++i) {
        const std::string n = std::to_string(i + 1);
        m.projectors.push_back({"projector_" + n, {"cube_" + n}, "collage_" + n});
    }
    for (int i = 0; i < 4; ++i) {
        const std::string n = std::to_string(i + 1);
        m.speakers.push_back({"speaker_" + n, speaker_pos[i], {SpeakerSource::Kind::slot, "collage_" + n}, 1.0, 2.0});
    }
    m.widgets.push_back({"city_menu",
                         {{1.5, 0.0, 1.2}, -kPi},
                         {{"karlsruhe", "Karlsruhe"}, {"seoul", "Seoul"}, {"zurich", "Zurich"}},
                         {"collage_1", "collage_2", "collage_3", "collage_4"}});
    return m;
}

}  // namespace detail

inline SceneManifest builtin_scene(std::string_view name, const BuiltinOptions& opts = {}) {
    if (name == "vf") return detail::versailles_fountain(opts);
    if (name == "mc") return detail::moving_cities();
    throw Error(ErrorCode::unknown_scene, "unknown built-in scene \"" + std::string(name) + "\"");
}

}  // namespace einstall
