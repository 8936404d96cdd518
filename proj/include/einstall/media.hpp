// Copyright 2026 The einstall Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "einstall/core.hpp"
#include "einstall/json_util.hpp"

namespace einstall {

enum class MediaKind { video, image, audio, text };

inline std::string_view to_string(MediaKind k) {
    switch (k) {
        case MediaKind::video: return "video";
        case MediaKind::image: return "image";
        case MediaKind::audio: return "audio";
        case MediaKind::text: return "text";
    }
    return "video";
}

inline std::optional<MediaKind> media_kind_from_string(std::string_view s) {
    if (s == "video") return MediaKind::video;
    if (s == "image") return MediaKind::image;
    if (s == "audio") return MediaKind::audio;
    if (s == "text") return MediaKind::text;
    return std::nullopt;
}

/// Metadata of one media file. Bytes are never decoded; duration and frame count drive playback.
struct MediaItem {
    std::string media_id;
    MediaKind kind = MediaKind::video;
    double duration = 0.0;  // seconds
    double fps = 1.0;
    std::int64_t frame_count = 1;
    std::string uri;

    friend bool operator==(const MediaItem&, const MediaItem&) = default;
};

inline std::int64_t expected_frame_count(double duration, double fps) {
    return static_cast<std::int64_t>(std::llround(duration * fps));
}

/// Returns an empty string when the item is consistent, otherwise the reason.
inline std::string media_item_problem(const MediaItem& item) {
    if (item.media_id.empty()) return "media_id must be non-empty";
    if (!(std::isfinite(item.duration) && item.duration > 0.0)) return "duration must be > 0";
    if (!(std::isfinite(item.fps) && item.fps > 0.0)) return "fps must be > 0";
    if (item.frame_count < 1) return "frame_count must be >= 1";
    if (item.kind == MediaKind::video && item.frame_count != expected_frame_count(item.duration, item.fps))
        return "frame_count must equal round(duration * fps) for video";
    if ((item.kind == MediaKind::image || item.kind == MediaKind::text) && item.fps != 1.0)
        return "fps must be 1 for image and text items";
    return {};
}

inline OJson media_item_to_json(const MediaItem& m) {
    OJson j = OJson::object();
    j["media_id"] = m.media_id;
    j["kind"] = to_string(m.kind);
    j["duration"] = m.duration;
    j["fps"] = m.fps;
    j["frame_count"] = m.frame_count;
    j["uri"] = m.uri;
    return j;
}

inline MediaItem media_item_fields(const ObjectReader& r) {
    MediaItem m;
    m.media_id = r.str("media_id");
    auto kind = media_kind_from_string(r.str("kind"));
    if (!kind) throw Error(r.codes().type, r.child("kind") + ": expected one of video, image, audio, text");
    m.kind = *kind;
    m.duration = r.num("duration");
    m.fps = r.num("fps");
    m.frame_count = r.integer("frame_count");
    m.uri = r.str("uri");
    return m;
}

inline MediaItem media_item_from_json(const Json& j, const std::string& path, SchemaCodes codes = {}) {
    ObjectReader r(j, path, {"media_id", "kind", "duration", "fps", "frame_count", "uri"}, codes);
    return media_item_fields(r);
}

struct Playlist {
    std::vector<MediaItem> items;
    double total_duration = 0.0;

    friend bool operator==(const Playlist&, const Playlist&) = default;
};

inline Playlist make_playlist(std::vector<MediaItem> items) {
    Playlist p;
    p.items = std::move(items);
    for (const auto& item : p.items) p.total_duration += item.duration;
    return p;
}

/// Media id reported for a surface that has nothing bound yet.
inline constexpr std::string_view kBlankMediaId = "(blank)";

}  // namespace einstall
