// Copyright 2026 The einstall Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "einstall/content_capsule.hpp"
#include "einstall/rng.hpp"
#include "support.hpp"

namespace einstall {
namespace {

namespace fs = std::filesystem;

void touch(const fs::path& p, std::string_view bytes = "x") {
    fs::create_directories(p.parent_path());
    write_file(p, bytes);
}

void media(const fs::path& slot_dir, const std::string& name, const std::string& meta) {
    touch(slot_dir / name, name);
    touch(slot_dir / (name + ".meta.json"), meta);
}

// Builds <cities> x <slots> x <files> with one image per file.
fs::path make_tree(const std::string& name, int cities, int slots, int files) {
    const fs::path dir = test::scratch_dir(name);
    for (int c = 0; c < cities; ++c)
        for (int s = 0; s < slots; ++s)
            for (int f = 0; f < files; ++f)
                media(dir / ("city" + std::to_string(c)) / ("slot_" + std::to_string(s)),
                      "img" + std::to_string(f) + ".jpg", R"({"duration": 2.5, "kind": "image"})");
    return dir;
}

ErrorCode error_of(const std::function<void()>& fn, std::string* message = nullptr) {
    try {
        fn();
    } catch (const Error& e) {
        if (message) *message = e.what();
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::io;
}

TEST(OpenCapsule, FixtureMatchesDirectoryListing) {
    const fs::path root = test::fixture_capsule_dir();
    const Capsule capsule = open_capsule(root);
    EXPECT_EQ(capsule.version, "capsule/1");

    // Oracle: walk the source tree directly and count media files (non-sidecar).
    std::set<std::tuple<std::string, std::string, std::string>> listed;
    for (const auto& e : fs::recursive_directory_iterator(test::source_dir() / "capsules" / "mc_src")) {
        if (!e.is_regular_file()) continue;
        const std::string name = e.path().filename().string();
        if (name.size() > 10 && name.substr(name.size() - 10) == ".meta.json") continue;
        listed.insert({e.path().parent_path().parent_path().filename().string(),
                       e.path().parent_path().filename().string(), name});
    }
    EXPECT_EQ(listed.size(), 60u);
    EXPECT_EQ(capsule.item_count(), listed.size());

    std::set<std::tuple<std::string, std::string, std::string>> indexed_items;
    for (const auto& [key, items] : capsule.index)
        for (const auto& item : items) {
            indexed_items.insert({key.city_id, key.slot, item.media_id});
            EXPECT_TRUE(fs::is_regular_file(root / item.uri)) << item.uri;
        }
    EXPECT_EQ(indexed_items, listed);
    EXPECT_EQ(capsule.index.size(), 12u);
}

TEST(OpenCapsule, CoversEveryWidgetRequest) {
    const Capsule capsule = open_capsule(test::fixture_capsule_dir());
    const auto mc = builtin_scene("mc");
    for (const auto& option : mc.widgets[0].options)
        for (const auto& slot : mc.widgets[0].driven_slots) EXPECT_TRUE(capsule.contains({option.city_id, slot}));
}

TEST(OpenCapsule, MissingIndex) {
    const auto dir = test::scratch_dir("no_index");
    EXPECT_EQ(error_of([&] { open_capsule(dir); }), ErrorCode::missing_index);
}

TEST(OpenCapsule, UnresolvableUriIsNamed) {
    const auto src = make_tree("unresolvable_src", 1, 1, 2);
    const auto out = test::scratch_dir("unresolvable_out");
    ingest_directory(src, out);
    fs::remove(out / "city0" / "slot_0" / "img1.jpg");
    std::string msg;
    EXPECT_EQ(error_of([&] { open_capsule(out); }, &msg), ErrorCode::unresolvable_uri);
    EXPECT_NE(msg.find("city0/slot_0/img1.jpg"), std::string::npos) << msg;
}

TEST(OpenCapsule, MalformedIndex) {
    const auto dir = test::scratch_dir("malformed");
    touch(dir / "a.jpg");
    const std::string entry =
        R"({"city_id":"c","slot":"s","media_id":"a.jpg","kind":"image","duration":1,"fps":1,"frame_count":1,"uri":"a.jpg"})";
    auto check = [&](const std::string& index) {
        write_file(dir / "index.json", index);
        return error_of([&] { open_capsule(dir); });
    };
    EXPECT_EQ(check("{"), ErrorCode::malformed_index);
    EXPECT_EQ(check(R"({"version":"capsule/2","entries":[]})"), ErrorCode::malformed_index);
    EXPECT_EQ(check(R"({"version":"capsule/1","entries":[)" + entry + "," + entry + "]}"), ErrorCode::malformed_index);
    std::string escape = entry;
    escape.replace(escape.find("\"uri\":\"a.jpg\""), 13, "\"uri\":\"../a.jpg\"");
    EXPECT_EQ(check(R"({"version":"capsule/1","entries":[)" + escape + "]}"), ErrorCode::malformed_index);
    write_file(dir / "index.json", R"({"version":"capsule/1","entries":[)" + entry + "]}");
    EXPECT_EQ(open_capsule(dir).item_count(), 1u);
}

TEST(IngestDirectory, CountsEntries) {
    const auto src = make_tree("count_src", 2, 4, 2);
    const auto out = test::scratch_dir("count_out");
    const Capsule made = ingest_directory(src, out);
    EXPECT_EQ(made.item_count(), 16u);
    const Capsule opened = open_capsule(out);
    EXPECT_EQ(opened.item_count(), 16u);
    EXPECT_EQ(opened.index, made.index);
}

TEST(IngestDirectory, ReingestIsByteIdentical) {
    const auto out_a = test::scratch_dir("reingest_a");
    const auto out_b = test::scratch_dir("reingest_b");
    ingest_directory(test::source_dir() / "capsules" / "mc_src", out_a);
    ingest_directory(test::source_dir() / "capsules" / "mc_src", out_b);
    const std::string first = read_file(out_a / "index.json");
    EXPECT_EQ(first, read_file(out_b / "index.json"));
    // And again into the same output directory.
    ingest_directory(test::source_dir() / "capsules" / "mc_src", out_a);
    EXPECT_EQ(first, read_file(out_a / "index.json"));
}

TEST(IngestDirectory, IndexIsSorted) {
    const Json doc = Json::parse(read_file(test::fixture_capsule_dir() / "index.json"));
    std::vector<std::tuple<std::string, std::string, std::string>> keys;
    for (const auto& e : doc["entries"])
        keys.emplace_back(e["city_id"].get<std::string>(), e["slot"].get<std::string>(),
                          e["media_id"].get<std::string>());
    EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
    EXPECT_EQ(doc["version"], "capsule/1");
}

TEST(IngestDirectory, EmptySlotNamesFolder) {
    const auto src = make_tree("empty_slot_src", 1, 2, 1);
    fs::create_directories(src / "city0" / "slot_9");
    std::string msg;
    EXPECT_EQ(error_of([&] { ingest_directory(src, test::scratch_dir("empty_slot_out")); }, &msg),
              ErrorCode::empty_slot);
    EXPECT_NE(msg.find("slot_9"), std::string::npos) << msg;
}

TEST(IngestDirectory, MissingSidecar) {
    const auto src = make_tree("sidecar_src", 1, 1, 1);
    touch(src / "city0" / "slot_0" / "orphan.mp4");
    std::string msg;
    EXPECT_EQ(error_of([&] { ingest_directory(src, test::scratch_dir("sidecar_out")); }, &msg),
              ErrorCode::missing_sidecar);
    EXPECT_NE(msg.find("orphan.mp4"), std::string::npos) << msg;
}

TEST(IngestDirectory, VideoSidecarDerivesFrameCount) {
    const auto src = test::scratch_dir("video_src");
    media(src / "c" / "s", "clip.mp4", R"({"duration": 9.5, "kind": "video", "fps": 24})");
    const Capsule c = ingest_directory(src, test::scratch_dir("video_out"));
    const MediaItem& item = c.index.at({"c", "s"}).at(0);
    EXPECT_EQ(item.frame_count, 228);
    EXPECT_EQ(item.uri, "c/s/clip.mp4");

    const auto bad = test::scratch_dir("video_bad_src");
    media(bad / "c" / "s", "clip.mp4", R"({"duration": 9.5, "kind": "video"})");
    EXPECT_EQ(error_of([&] { ingest_directory(bad, test::scratch_dir("video_bad_out")); }), ErrorCode::malformed_index);
}

TEST(IngestDirectory, RandomTreesRoundTrip) {
    SplitMix64 rng(99);
    for (int round = 0; round < 8; ++round) {
        const int cities = 1 + static_cast<int>(rng.next() % 3);
        const int slots = 1 + static_cast<int>(rng.next() % 3);
        const int files = 1 + static_cast<int>(rng.next() % 4);
        const auto src = make_tree("random_src", cities, slots, files);
        const auto out = test::scratch_dir("random_out");
        ingest_directory(src, out);
        const Capsule c = open_capsule(out);
        EXPECT_EQ(c.item_count(), static_cast<std::size_t>(cities * slots * files));
        EXPECT_EQ(c.index.size(), static_cast<std::size_t>(cities * slots));
    }
}

TEST(ResolvePlaylist, Deterministic) {
    const Capsule c = open_capsule(test::fixture_capsule_dir());
    EXPECT_EQ(resolve_playlist(c, "seoul", "collage_2", 5), resolve_playlist(c, "seoul", "collage_2", 5));
}

TEST(ResolvePlaylist, PermutationOfIndex) {
    const Capsule c = open_capsule(test::fixture_capsule_dir());
    int differing = 0;
    for (const auto& [key, items] : c.index) {
        auto sorted_ids = [](std::vector<MediaItem> v) {
            std::vector<std::string> ids;
            for (const auto& m : v) ids.push_back(m.media_id);
            std::sort(ids.begin(), ids.end());
            return ids;
        };
        const auto base = sorted_ids(items);
        std::vector<std::string> first_order;
        for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 0xFFFFFFFFFFFFFFFFULL}) {
            const Playlist p = resolve_playlist(c, key.city_id, key.slot, seed);
            EXPECT_EQ(sorted_ids(p.items), base);
            double sum = 0.0;
            for (const auto& m : p.items) sum += m.duration;
            EXPECT_NEAR(p.total_duration, sum, 1e-9);
            std::vector<std::string> order;
            for (const auto& m : p.items) order.push_back(m.media_id);
            if (first_order.empty())
                first_order = order;
            else if (order != first_order)
                ++differing;
        }
    }
    EXPECT_GT(differing, 0);
}

TEST(ResolvePlaylist, UnknownKey) {
    const Capsule c = open_capsule(test::fixture_capsule_dir());
    EXPECT_EQ(error_of([&] { resolve_playlist(c, "atlantis", "collage_1", 1); }), ErrorCode::unknown_key);
}

std::vector<std::string> order_of(const Playlist& p) {
    std::vector<std::string> out;
    for (const auto& m : p.items) out.push_back(m.media_id);
    return out;
}

// Orders computed by an independent script implementing FNV-1a64, SplitMix64 and the
// back-to-front Fisher-Yates over the sorted media ids.
TEST(ResolvePlaylist, FrozenOrders) {
    const Capsule c = open_capsule(test::fixture_capsule_dir());
    EXPECT_EQ(order_of(resolve_playlist(c, "karlsruhe", "collage_1", 42)),
              (std::vector<std::string>{"map_tile.jpg", "news_feed.mp4", "tweets.txt", "radio.mp3", "street_view.mp4"}));
    EXPECT_EQ(order_of(resolve_playlist(c, "seoul", "collage_3", 7)),
              (std::vector<std::string>{"news_feed.mp4", "map_tile.jpg", "radio.mp3", "street_view.mp4", "tweets.txt"}));
    EXPECT_EQ(order_of(resolve_playlist(c, "zurich", "collage_4", 0)),
              (std::vector<std::string>{"street_view.mp4", "news_feed.mp4", "tweets.txt", "radio.mp3", "map_tile.jpg"}));
}

TEST(SeededShuffle, IsAPermutationForAllSizes) {
    for (std::size_t n = 0; n < 40; ++n) {
        std::vector<int> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<int>(i);
        seeded_shuffle(v, n * 7919);
        std::vector<int> sorted = v;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(sorted[i], static_cast<int>(i));
    }
}

}  // namespace
}  // namespace einstall
