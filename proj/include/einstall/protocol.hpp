// Copyright 2026 The einstall Authors
// SPDX-License-Identifier: Apache-2.0

// Wire protocol "einstall/1": one canonical JSON object per line (NDJSON), "type" first, keys in
// a fixed order, no whitespace. Decoding is strict: unknown types and unknown fields are rejected.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "einstall/core.hpp"
#include "einstall/json_util.hpp"
#include "einstall/motion_compression.hpp"
#include "einstall/reenactment_engine.hpp"

namespace einstall::protocol {

inline constexpr std::string_view kVersion = "einstall/1";

// client -> server
struct Hello {
    std::string client_name;
    std::string mode;  // tracked | scripted | viewer
    std::string protocol{kVersion};
    friend bool operator==(const Hello&, const Hello&) = default;
};
struct PoseInput {
    std::uint64_t seq = 0;
    VirtDelta move;
    friend bool operator==(const PoseInput&, const PoseInput&) = default;
};
struct SelectCityRequest {
    std::uint64_t seq = 0;
    std::string city_id;
    friend bool operator==(const SelectCityRequest&, const SelectCityRequest&) = default;
};
struct Bye {
    std::uint64_t seq = 0;
    friend bool operator==(const Bye&, const Bye&) = default;
};

// server -> client
struct Welcome {
    std::string scene_id;
    std::string title;
    double tick_rate = 30.0;
    std::vector<std::string> surfaces;
    std::vector<std::string> speakers;
    std::vector<CityOption> menu_options;
    friend bool operator==(const Welcome&, const Welcome&) = default;
};
struct Frame {
    std::uint64_t seq = 0;
    std::int64_t t_ticks = 0;
    double time = 0.0;
    Pose user_virtual_pose;
    Pose phys_pose;
    double heading_offset = 0.0;
    std::vector<SurfaceState> surfaces;
    std::vector<std::pair<std::string, double>> speaker_gains;
    std::optional<std::string> selected_city;
    friend bool operator==(const Frame&, const Frame&) = default;
};
struct ErrorMsg {
    std::string code;  // bad_version | handshake_timeout | bad_input | malformed
    std::string detail;
    friend bool operator==(const ErrorMsg&, const ErrorMsg&) = default;
};

using Message = std::variant<Hello, PoseInput, SelectCityRequest, Bye, Welcome, Frame, ErrorMsg>;

/// Wire error code for a decode or engine failure.
inline std::string wire_code(ErrorCode code) {
    switch (code) {
        case ErrorCode::bad_version: return "bad_version";
        case ErrorCode::malformed:
        case ErrorCode::unknown_type:
        case ErrorCode::missing_field:
        case ErrorCode::syntax: return "malformed";
        default: return "bad_input";
    }
}

inline Welcome make_welcome(const SceneManifest& m, double tick_rate) {
    Welcome w{m.scene_id, m.title, tick_rate, {}, {}, {}};
    for (const auto& n : m.nodes)
        if (n.kind == NodeKind::media_surface) w.surfaces.push_back(n.node_id);
    for (const auto& s : m.speakers) w.speakers.push_back(s.speaker_id);
    for (const auto& widget : m.widgets)
        w.menu_options.insert(w.menu_options.end(), widget.options.begin(), widget.options.end());
    return w;
}

inline Frame make_frame(const TickFrame& f, const MappingSnapshot& mapping) {
    return {static_cast<std::uint64_t>(f.t_ticks), f.t_ticks, f.time, f.user_virtual_pose, mapping.phys_pose,
            mapping.heading_offset, f.surfaces, f.speaker_gains, f.menu.selected_city};
}

// --- encoding ----------------------------------------------------------------------------

inline OJson surfaces_to_json(const std::vector<SurfaceState>& surfaces) {
    OJson arr = OJson::array();
    for (const auto& s : surfaces) {
        OJson o = OJson::object();
        o["surface_id"] = s.surface_id;
        o["media_id"] = s.media_id;
        o["frame_index"] = s.frame_index;
        arr.push_back(std::move(o));
    }
    return arr;
}

inline OJson gains_to_json(const std::vector<std::pair<std::string, double>>& gains) {
    OJson o = OJson::object();
    for (const auto& [id, g] : gains) o[id] = g;
    return o;
}

inline OJson options_to_json(const std::vector<CityOption>& options) {
    OJson arr = OJson::array();
    for (const auto& opt : options) {
        OJson o = OJson::object();
        o["city_id"] = opt.city_id;
        o["label"] = opt.label;
        arr.push_back(std::move(o));
    }
    return arr;
}

inline OJson optional_string(const std::optional<std::string>& s) { return s ? OJson(*s) : OJson(nullptr); }

inline OJson to_json(const Message& msg) {
    OJson j = OJson::object();
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Hello>) {
                j["type"] = "HELLO";
                j["client_name"] = m.client_name;
                j["mode"] = m.mode;
                j["protocol"] = m.protocol;
            } else if constexpr (std::is_same_v<T, PoseInput>) {
                j["type"] = "POSE_INPUT";
                j["seq"] = m.seq;
                OJson mv = OJson::object();
                mv["ds"] = m.move.ds;
                mv["dtheta"] = m.move.dtheta;
                j["move"] = std::move(mv);
            } else if constexpr (std::is_same_v<T, SelectCityRequest>) {
                j["type"] = "SELECT_CITY";
                j["seq"] = m.seq;
                j["city_id"] = m.city_id;
            } else if constexpr (std::is_same_v<T, Bye>) {
                j["type"] = "BYE";
                j["seq"] = m.seq;
            } else if constexpr (std::is_same_v<T, Welcome>) {
                j["type"] = "WELCOME";
                j["scene_id"] = m.scene_id;
                j["title"] = m.title;
                j["tick_rate"] = m.tick_rate;
                j["surfaces"] = m.surfaces;
                j["speakers"] = m.speakers;
                j["menu_options"] = options_to_json(m.menu_options);
            } else if constexpr (std::is_same_v<T, Frame>) {
                j["type"] = "FRAME";
                j["seq"] = m.seq;
                j["t_ticks"] = m.t_ticks;
                j["time"] = m.time;
                j["user_virtual_pose"] = pose_to_json(m.user_virtual_pose);
                OJson mapping = OJson::object();
                mapping["phys_pose"] = pose_to_json(m.phys_pose);
                mapping["heading_offset"] = m.heading_offset;
                j["mapping"] = std::move(mapping);
                j["surfaces"] = surfaces_to_json(m.surfaces);
                j["speaker_gains"] = gains_to_json(m.speaker_gains);
                j["selected_city"] = optional_string(m.selected_city);
            } else {
                j["type"] = "ERROR";
                j["code"] = m.code;
                j["detail"] = m.detail;
            }
        },
        msg);
    return j;
}

/// Compact JSON followed by LF.
inline std::string encode_message(const Message& msg) { return to_json(msg).dump() + "\n"; }

// --- decoding ----------------------------------------------------------------------------

inline constexpr SchemaCodes kWireCodes{ErrorCode::missing_field, ErrorCode::malformed, ErrorCode::malformed};

inline std::vector<std::string> wire_strings(const Json& arr, const std::string& path) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_string()) throw Error(ErrorCode::malformed, indexed(path, i) + ": expected string");
        out.push_back(arr[i].get<std::string>());
    }
    return out;
}

inline std::vector<SurfaceState> surfaces_from_json(const Json& arr, const std::string& path) {
    if (!arr.is_array()) throw Error(ErrorCode::malformed, path + ": expected array");
    std::vector<SurfaceState> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        ObjectReader r(arr[i], indexed(path, i), {"surface_id", "media_id", "frame_index"}, kWireCodes);
        out.push_back({r.str("surface_id"), r.str("media_id"), r.integer("frame_index")});
    }
    return out;
}

inline std::vector<std::pair<std::string, double>> gains_from_json(const Json& obj, const std::string& path) {
    if (!obj.is_object()) throw Error(ErrorCode::malformed, path + ": expected object");
    std::vector<std::pair<std::string, double>> out;
    for (const auto& item : obj.items()) {
        if (!item.value().is_number()) throw Error(ErrorCode::malformed, path + "." + item.key() + ": expected number");
        out.emplace_back(item.key(), item.value().get<double>());
    }
    return out;
}

inline std::vector<CityOption> options_from_json(const Json& arr, const std::string& path) {
    if (!arr.is_array()) throw Error(ErrorCode::malformed, path + ": expected array");
    std::vector<CityOption> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        ObjectReader r(arr[i], indexed(path, i), {"city_id", "label"}, kWireCodes);
        out.push_back({r.str("city_id"), r.str("label")});
    }
    return out;
}

inline std::optional<std::string> optional_string_from(const ObjectReader& r, std::string_view key) {
    const Json& v = r.at(key);
    if (v.is_null()) return std::nullopt;
    if (!v.is_string()) throw Error(ErrorCode::malformed, r.child(key) + ": expected string or null");
    return v.get<std::string>();
}

/// Decodes one line (a trailing LF or CRLF is accepted). Errors: malformed, unknown_type,
/// missing_field, bad_version.
inline Message decode_message(std::string_view line) {
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
    // The JSON parser sees ordered keys; strictness is enforced by ObjectReader.
    const Json doc = parse_json_text(line, ErrorCode::malformed);
    if (!doc.is_object()) throw Error(ErrorCode::malformed, "message must be a JSON object");
    auto type_it = doc.find("type");
    if (type_it == doc.end()) throw Error(ErrorCode::missing_field, "type: missing field");
    if (!type_it->is_string()) throw Error(ErrorCode::malformed, "type: expected string");
    const std::string type = type_it->get<std::string>();

    if (type == "HELLO") {
        ObjectReader r(doc, "", {"type", "client_name", "mode", "protocol"}, kWireCodes);
        Hello h{r.str("client_name"), r.str("mode"), r.str("protocol")};
        if (h.protocol != kVersion)
            throw Error(ErrorCode::bad_version, "unsupported protocol \"" + h.protocol + "\", expected einstall/1");
        if (h.mode != "tracked" && h.mode != "scripted" && h.mode != "viewer")
            throw Error(ErrorCode::malformed, "mode: expected tracked, scripted or viewer");
        return h;
    }
    if (type == "POSE_INPUT") {
        ObjectReader r(doc, "", {"type", "seq", "move"}, kWireCodes);
        ObjectReader mv(r.at("move"), "move", {"ds", "dtheta"}, kWireCodes);
        return PoseInput{r.uinteger("seq"), {mv.num("ds"), mv.num("dtheta")}};
    }
    if (type == "SELECT_CITY") {
        ObjectReader r(doc, "", {"type", "seq", "city_id"}, kWireCodes);
        return SelectCityRequest{r.uinteger("seq"), r.str("city_id")};
    }
    if (type == "BYE") {
        ObjectReader r(doc, "", {"type", "seq"}, kWireCodes);
        return Bye{r.uinteger("seq")};
    }
    if (type == "WELCOME") {
        ObjectReader r(doc, "", {"type", "scene_id", "title", "tick_rate", "surfaces", "speakers", "menu_options"},
                       kWireCodes);
        return Welcome{r.str("scene_id"),
                       r.str("title"),
                       r.num("tick_rate"),
                       wire_strings(r.array("surfaces"), "surfaces"),
                       wire_strings(r.array("speakers"), "speakers"),
                       options_from_json(r.at("menu_options"), "menu_options")};
    }
    if (type == "FRAME") {
        ObjectReader r(doc, "",
                       {"type", "seq", "t_ticks", "time", "user_virtual_pose", "mapping", "surfaces", "speaker_gains",
                        "selected_city"},
                       kWireCodes);
        ObjectReader mapping(r.at("mapping"), "mapping", {"phys_pose", "heading_offset"}, kWireCodes);
        Frame f;
        f.seq = r.uinteger("seq");
        f.t_ticks = r.integer("t_ticks");
        f.time = r.num("time");
        f.user_virtual_pose = pose_from_json(r.at("user_virtual_pose"), "user_virtual_pose", kWireCodes);
        f.phys_pose = pose_from_json(mapping.at("phys_pose"), "mapping.phys_pose", kWireCodes);
        f.heading_offset = mapping.num("heading_offset");
        f.surfaces = surfaces_from_json(r.at("surfaces"), "surfaces");
        f.speaker_gains = gains_from_json(r.at("speaker_gains"), "speaker_gains");
        f.selected_city = optional_string_from(r, "selected_city");
        return f;
    }
    if (type == "ERROR") {
        ObjectReader r(doc, "", {"type", "code", "detail"}, kWireCodes);
        return ErrorMsg{r.str("code"), r.str("detail")};
    }
    throw Error(ErrorCode::unknown_type, "unknown message type \"" + type + "\"");
}

}  // namespace einstall::protocol
