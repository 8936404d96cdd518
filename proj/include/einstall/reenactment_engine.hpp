// Copyright 2026 The einstall Authors
// SPDX-License-Identifier: Apache-2.0

// Per-tick program logic of a re-enacted artwork: looping channel playback with optional
// circuit-delay emulation, menu-driven projector rebinding and distance-based speaker gains.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "einstall/content_capsule.hpp"
#include "einstall/core.hpp"
#include "einstall/media.hpp"
#include "einstall/scene_model.hpp"

namespace einstall {

struct EngineConfig {
    double tick_rate = 30.0;  // Hz
    bool delay_emulation = false;
    double delay_offset = 0.5;  // seconds, added to every channel after the first when emulating
    std::uint64_t rng_seed = 0;
};

struct SlotBinding {
    Playlist playlist;
    std::int64_t clock_start_tick = 0;

    friend bool operator==(const SlotBinding&, const SlotBinding&) = default;
};

struct ChannelPlayback {
    Playlist playlist;
    double offset = 0.0;  // effective delay in seconds
    bool loop = true;

    friend bool operator==(const ChannelPlayback&, const ChannelPlayback&) = default;
};

inline constexpr double kEyeHeight = 1.7;

struct EngineState {
    std::int64_t t_ticks = 0;
    std::shared_ptr<const SceneManifest> manifest;
    std::shared_ptr<const Capsule> capsule;
    EngineConfig config;
    std::map<std::string, ChannelPlayback> channels;
    std::map<std::string, SlotBinding> slot_bindings;
    std::optional<std::string> selected_city;
    Pose user_virtual_pose{{0.0, 0.0, kEyeHeight}, 0.0};
};

struct SurfaceState {
    std::string surface_id;
    std::string media_id;
    std::int64_t frame_index = 0;

    friend bool operator==(const SurfaceState&, const SurfaceState&) = default;
};

struct MenuState {
    std::vector<CityOption> options;
    std::optional<std::string> selected_city;

    friend bool operator==(const MenuState&, const MenuState&) = default;
};

struct TickFrame {
    std::int64_t t_ticks = 0;
    double time = 0.0;
    std::vector<SurfaceState> surfaces;
    std::vector<std::pair<std::string, double>> speaker_gains;  // manifest order
    MenuState menu;
    Pose user_virtual_pose;

    friend bool operator==(const TickFrame&, const TickFrame&) = default;
};

struct SelectCity {
    std::string city_id;
};
struct SetPose {
    Pose pose;
};
using EngineInput = std::variant<SelectCity, SetPose>;

/// Frame shown at time t by a looping item: floor((t - offset) * fps) reduced modulo frame_count
/// into [0, frame_count).
inline std::int64_t frame_index(const MediaItem& item, double t, double delay_offset = 0.0) {
    const auto raw = static_cast<std::int64_t>(floor_snap((t - delay_offset) * item.fps));
    return euclid_mod(raw, std::max<std::int64_t>(1, item.frame_count));
}

struct PlaybackPosition {
    std::size_t item = 0;
    std::int64_t frame_index = 0;
};

/// Locates `elapsed` seconds inside a playlist whose items play back to back. Looping playlists
/// wrap over total_duration; non-looping ones hold the first frame before the start and the last
/// frame after the end.
inline PlaybackPosition locate(const Playlist& playlist, double elapsed, bool loop) {
    const auto& items = playlist.items;
    if (items.empty()) return {};
    const double total = playlist.total_duration;
    double pos = elapsed;
    if (loop) {
        pos = elapsed - floor_snap(elapsed / total) * total;
        if (pos < 0.0) pos = 0.0;
    } else if (elapsed < 0.0) {
        return {0, 0};
    } else if (elapsed >= total) {
        return {items.size() - 1, items.back().frame_count - 1};
    }
    double start = 0.0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const double end = start + items[i].duration;
        if (pos + 1e-9 < end || i + 1 == items.size()) {
            const double local = std::max(0.0, pos - start);
            auto frame = static_cast<std::int64_t>(floor_snap(local * items[i].fps));
            frame = std::clamp<std::int64_t>(frame, 0, items[i].frame_count - 1);
            return {i, frame};
        }
        start = end;
    }
    return {};
}

/// Inverse-distance gain with a unit clamp inside the reference distance.
inline double speaker_gain(const Pose& user, const Speaker& speaker) {
    constexpr double kEps = 1e-6;
    const double d = distance(user.position, speaker.position);
    return speaker.reference_gain * std::min(1.0, speaker.reference_distance / std::max(d, kEps));
}

inline EngineState init_engine(const SceneManifest& manifest, std::shared_ptr<const Capsule> capsule,
                               const EngineConfig& config) {
    if (!(std::isfinite(config.tick_rate) && config.tick_rate > 0.0))
        throw Error(ErrorCode::bad_input, "tick_rate must be > 0");
    if (!(std::isfinite(config.delay_offset) && config.delay_offset >= 0.0))
        throw Error(ErrorCode::bad_input, "delay_offset must be >= 0");
    if (const auto violations = validate_manifest(manifest); !violations.empty())
        throw Error(ErrorCode::schema, "invalid manifest: " + violations.front().path + ": " + violations.front().message);

    const bool needs_capsule =
        !manifest.widgets.empty() || std::any_of(manifest.channels.begin(), manifest.channels.end(), [](const auto& c) {
            return std::holds_alternative<CapsuleKey>(c.playlist);
        });
    if (needs_capsule && !capsule) throw Error(ErrorCode::capsule_required, "capsule required");

    EngineState s;
    s.manifest = std::make_shared<const SceneManifest>(manifest);
    s.capsule = std::move(capsule);
    s.config = config;

    for (std::size_t i = 0; i < manifest.channels.size(); ++i) {
        const auto& c = manifest.channels[i];
        ChannelPlayback pb;
        if (const auto* key = std::get_if<CapsuleKey>(&c.playlist)) {
            pb.playlist = resolve_playlist(*s.capsule, key->city_id, key->slot, config.rng_seed);
        } else {
            pb.playlist = make_playlist(std::get<std::vector<MediaItem>>(c.playlist));
        }
        pb.offset = c.delay_offset + (config.delay_emulation && i > 0 ? config.delay_offset : 0.0);
        pb.loop = c.loop;
        s.channels.emplace(c.channel_id, std::move(pb));
    }

    for (const auto& w : manifest.widgets)
        for (const auto& opt : w.options)
            for (const auto& slot : w.driven_slots)
                if (!s.capsule->contains({opt.city_id, slot}))
                    throw Error(ErrorCode::unknown_key,
                                "capsule lacks (" + opt.city_id + ", " + slot + ") requested by " + w.widget_id);
    return s;
}

inline EngineState handle_input(EngineState state, const EngineInput& input) {
    if (const auto* set = std::get_if<SetPose>(&input)) {
        if (!set->pose.position.finite() || !std::isfinite(set->pose.yaw))
            throw Error(ErrorCode::bad_input, "pose must be finite");
        state.user_virtual_pose = {set->pose.position, wrap_angle(set->pose.yaw)};
        return state;
    }
    const auto& city = std::get<SelectCity>(input).city_id;
    const auto& widgets = state.manifest->widgets;
    if (widgets.empty()) throw Error(ErrorCode::no_menu_widget, "no menu widget");
    const MenuWidget* widget = nullptr;
    for (const auto& w : widgets) {
        if (std::any_of(w.options.begin(), w.options.end(), [&](const CityOption& o) { return o.city_id == city; })) {
            widget = &w;
            break;
        }
    }
    if (!widget) throw Error(ErrorCode::unknown_city, "unknown city \"" + city + "\"");
    if (state.selected_city == city) return state;
    for (const auto& slot : widget->driven_slots) {
        state.slot_bindings[slot] =
            SlotBinding{resolve_playlist(*state.capsule, city, slot, state.config.rng_seed), state.t_ticks};
    }
    state.selected_city = city;
    return state;
}

namespace detail {

inline SurfaceState surface_state(const EngineState& s, const SceneNode& node, double time) {
    SurfaceState out{node.node_id, std::string(kBlankMediaId), 0};
    const Binding& b = *node.binding;
    if (b.target == Binding::Target::channel) {
        const ChannelPlayback& pb = s.channels.at(b.id);
        const auto pos = locate(pb.playlist, time - pb.offset, pb.loop);
        out.media_id = pb.playlist.items[pos.item].media_id;
        out.frame_index = pos.frame_index;
        return out;
    }
    const Projector* proj = s.manifest->find_projector(b.id);
    auto it = s.slot_bindings.find(proj->slot);
    if (it == s.slot_bindings.end()) return out;
    const double elapsed =
        static_cast<double>(s.t_ticks - it->second.clock_start_tick) / s.config.tick_rate;
    const auto pos = locate(it->second.playlist, elapsed, true);
    out.media_id = it->second.playlist.items[pos.item].media_id;
    out.frame_index = pos.frame_index;
    return out;
}

}  // namespace detail

/// Advances one tick and synthesizes the frame for the new time t_ticks / tick_rate.
inline std::pair<EngineState, TickFrame> tick(EngineState state) {
    ++state.t_ticks;
    TickFrame f;
    f.t_ticks = state.t_ticks;
    f.time = static_cast<double>(state.t_ticks) / state.config.tick_rate;
    for (const auto& node : state.manifest->nodes)
        if (node.kind == NodeKind::media_surface) f.surfaces.push_back(detail::surface_state(state, node, f.time));
    for (const auto& sp : state.manifest->speakers)
        f.speaker_gains.emplace_back(sp.speaker_id, speaker_gain(state.user_virtual_pose, sp));
    for (const auto& w : state.manifest->widgets)
        f.menu.options.insert(f.menu.options.end(), w.options.begin(), w.options.end());
    f.menu.selected_city = state.selected_city;
    f.user_virtual_pose = state.user_virtual_pose;
    return {std::move(state), std::move(f)};
}

}  // namespace einstall
