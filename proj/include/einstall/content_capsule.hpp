// Copyright 2026 The einstall Authors
// SPDX-License-Identifier: Apache-2.0

// Offline capsule: a plain directory with index.json plus the snapshotted media files that
// stand in for live Internet content. Only metadata is read; media bytes are never decoded.

#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "einstall/core.hpp"
#include "einstall/json_util.hpp"
#include "einstall/media.hpp"
#include "einstall/rng.hpp"
#include "einstall/scene_model.hpp"

namespace einstall {

inline constexpr std::string_view kCapsuleVersion = "capsule/1";
inline constexpr std::string_view kSidecarSuffix = ".meta.json";

struct Capsule {
    std::filesystem::path root;
    std::string version{kCapsuleVersion};
    std::map<CapsuleKey, std::vector<MediaItem>> index;

    [[nodiscard]] bool contains(const CapsuleKey& key) const { return index.count(key) != 0; }

    [[nodiscard]] std::size_t item_count() const {
        std::size_t n = 0;
        for (const auto& [key, items] : index) n += items.size();
        return n;
    }
};

namespace detail {

inline bool is_safe_relative(const std::string& uri) {
    if (uri.empty()) return false;
    const std::filesystem::path p(uri);
    if (p.is_absolute()) return false;
    for (const auto& part : p)
        if (part == "..") return false;
    return true;
}

inline std::string capsule_index_text(const Capsule& capsule) {
    OJson entries = OJson::array();
    for (const auto& [key, items] : capsule.index) {
        for (const auto& item : items) {
            OJson e = OJson::object();
            e["city_id"] = key.city_id;
            e["slot"] = key.slot;
            e["media_id"] = item.media_id;
            e["kind"] = to_string(item.kind);
            e["duration"] = item.duration;
            e["fps"] = item.fps;
            e["frame_count"] = item.frame_count;
            e["uri"] = item.uri;
            entries.push_back(std::move(e));
        }
    }
    OJson doc = OJson::object();
    doc["version"] = capsule.version;
    doc["entries"] = std::move(entries);
    return doc.dump(2) + "\n";
}

}  // namespace detail

/// Opens a capsule directory and verifies every invariant eagerly: index shape, sort order,
/// per-item metadata and that each uri resolves to a regular file.
inline Capsule open_capsule(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    const fs::path index_path = dir / "index.json";
    if (!fs::is_regular_file(index_path))
        throw Error(ErrorCode::missing_index, "missing index: " + index_path.string());

    const SchemaCodes codes{ErrorCode::malformed_index, ErrorCode::malformed_index, ErrorCode::malformed_index};
    const Json doc = parse_json_text(read_file(index_path), ErrorCode::malformed_index);
    ObjectReader top(doc, "", {"version", "entries"}, codes);

    Capsule capsule;
    capsule.root = dir;
    capsule.version = top.str("version");
    if (capsule.version != kCapsuleVersion)
        throw Error(ErrorCode::malformed_index, "unsupported capsule version \"" + capsule.version + "\"");

    const Json& entries = top.array("entries");
    std::tuple<std::string, std::string, std::string> previous;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const std::string path = indexed("entries", i);
        ObjectReader r(entries[i], path, {"city_id", "slot", "media_id", "kind", "duration", "fps", "frame_count", "uri"},
                       codes);
        CapsuleKey key{r.str("city_id"), r.str("slot")};
        MediaItem item = media_item_fields(r);
        if (const std::string problem = media_item_problem(item); !problem.empty())
            throw Error(ErrorCode::malformed_index, path + ": " + problem);
        auto order = std::tuple{key.city_id, key.slot, item.media_id};
        if (i > 0 && !(previous < order))
            throw Error(ErrorCode::malformed_index, path + ": entries must be sorted by (city_id, slot, media_id)");
        previous = order;
        if (!detail::is_safe_relative(item.uri))
            throw Error(ErrorCode::malformed_index, path + ".uri: must be a relative path inside the capsule");
        if (!fs::is_regular_file(dir / item.uri))
            throw Error(ErrorCode::unresolvable_uri, "unresolvable uri \"" + item.uri + "\"");
        capsule.index[key].push_back(std::move(item));
    }
    return capsule;
}

/// Key for the seeded shuffle: FNV-1a64 over "city\x1fslot\x1f<seed in decimal>".
inline std::uint64_t playlist_seed(std::string_view city_id, std::string_view slot, std::uint64_t seed) {
    Fnv1a64 h;
    h.update(city_id);
    h.update("\x1f");
    h.update(slot);
    h.update("\x1f");
    h.update(std::to_string(seed));
    return h.digest();
}

/// Fisher-Yates from the back (for i = n..2 swap i-1 with next() mod i), driven by SplitMix64.
template <typename T>
void seeded_shuffle(std::vector<T>& items, std::uint64_t key) {
    SplitMix64 rng(key);
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next() % i);
        std::swap(items[i - 1], items[j]);
    }
}

inline Playlist resolve_playlist(const Capsule& capsule, std::string_view city_id, std::string_view slot,
                                 std::uint64_t seed) {
    const auto it = capsule.index.find(CapsuleKey{std::string(city_id), std::string(slot)});
    if (it == capsule.index.end())
        throw Error(ErrorCode::unknown_key,
                    "unknown capsule key (" + std::string(city_id) + ", " + std::string(slot) + ")");
    std::vector<MediaItem> items = it->second;
    seeded_shuffle(items, playlist_seed(city_id, slot, seed));
    return make_playlist(std::move(items));
}

namespace detail {

inline std::vector<std::filesystem::path> sorted_children(const std::filesystem::path& dir, bool want_dirs) {
    std::vector<std::filesystem::path> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (want_dirs ? entry.is_directory() : entry.is_regular_file()) out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.filename().generic_string() < b.filename().generic_string();
    });
    return out;
}

inline bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

inline MediaItem read_sidecar(const std::filesystem::path& media, const std::filesystem::path& sidecar) {
    const std::string name = media.filename().generic_string();
    const Json doc = parse_json_text(read_file(sidecar), ErrorCode::malformed_index);
    const SchemaCodes codes{ErrorCode::malformed_index, ErrorCode::malformed_index, ErrorCode::malformed_index};
    ObjectReader r(doc, sidecar.filename().generic_string(), {"duration", "fps", "kind"}, codes);
    MediaItem item;
    item.media_id = name;
    auto kind = media_kind_from_string(r.str("kind"));
    if (!kind) throw Error(ErrorCode::malformed_index, r.child("kind") + ": expected one of video, image, audio, text");
    item.kind = *kind;
    item.duration = r.num("duration");
    item.fps = r.has("fps") ? r.num("fps") : 1.0;
    if (item.kind == MediaKind::video && !r.has("fps"))
        throw Error(ErrorCode::malformed_index, r.child("fps") + ": required for video");
    item.frame_count = std::max<std::int64_t>(1, expected_frame_count(item.duration, item.fps));
    if (const std::string problem = media_item_problem(item); !problem.empty())
        throw Error(ErrorCode::malformed_index, sidecar.string() + ": " + problem);
    return item;
}

}  // namespace detail

/// Snapshots a `<city>/<slot>/<files>` tree (each file with a `<file>.meta.json` sidecar) into a
/// capsule directory: files are copied, index.json is written sorted by (city, slot, media_id).
/// Re-ingesting an unchanged tree produces identical bytes.
inline Capsule ingest_directory(const std::filesystem::path& src, const std::filesystem::path& out) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(src)) throw Error(ErrorCode::io, "not a directory: " + src.string());

    Capsule capsule;
    capsule.root = out;
    for (const auto& city_dir : detail::sorted_children(src, true)) {
        const std::string city = city_dir.filename().generic_string();
        for (const auto& slot_dir : detail::sorted_children(city_dir, true)) {
            const std::string slot = slot_dir.filename().generic_string();
            std::vector<MediaItem> items;
            for (const auto& file : detail::sorted_children(slot_dir, false)) {
                const std::string name = file.filename().generic_string();
                if (detail::ends_with(name, kSidecarSuffix)) continue;
                const fs::path sidecar = slot_dir / (name + std::string(kSidecarSuffix));
                if (!fs::is_regular_file(sidecar))
                    throw Error(ErrorCode::missing_sidecar, "missing sidecar metadata for " + file.string());
                MediaItem item = detail::read_sidecar(file, sidecar);
                item.uri = city + "/" + slot + "/" + name;
                items.push_back(std::move(item));
            }
            if (items.empty()) throw Error(ErrorCode::empty_slot, "empty slot folder " + slot_dir.string());
            capsule.index[{city, slot}] = std::move(items);
        }
    }

    fs::create_directories(out);
    for (const auto& [key, items] : capsule.index) {
        const fs::path dest_dir = out / key.city_id / key.slot;
        fs::create_directories(dest_dir);
        for (const auto& item : items) {
            const fs::path from = src / key.city_id / key.slot / item.media_id;
            if (fs::weakly_canonical(from) != fs::weakly_canonical(dest_dir / item.media_id))
                fs::copy_file(from, dest_dir / item.media_id, fs::copy_options::overwrite_existing);
        }
    }
    write_file(out / "index.json", detail::capsule_index_text(capsule));
    return capsule;
}

}  // namespace einstall
