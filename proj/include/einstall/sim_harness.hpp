// Copyright 2026 The einstall Authors
// SPDX-License-Identifier: Apache-2.0

// Headless scripted visits. Each tick: apply the script action, move the walker through the
// motion-compression mapping, simulate and fuse sensor readings of the true physical pose, tick
// the engine and append a trace record. Traces persist as NDJSON (header line + one record per
// tick) and hash with FNV-1a over the record lines.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "einstall/content_capsule.hpp"
#include "einstall/core.hpp"
#include "einstall/json_util.hpp"
#include "einstall/motion_compression.hpp"
#include "einstall/protocol.hpp"
#include "einstall/reenactment_engine.hpp"
#include "einstall/rng.hpp"
#include "einstall/scene_model.hpp"
#include "einstall/tracking.hpp"

namespace einstall {

struct Idle {
    friend bool operator==(const Idle&, const Idle&) = default;
};

struct WalkStep {
    std::int64_t at_tick = 1;
    std::variant<VirtDelta, SelectCity, Idle> action;
};

struct WalkScript {
    std::vector<WalkStep> steps;
};

/// {"steps": [{"at_tick": 1, "action": "move", "ds": 0.05, "dtheta": 0, "repeat": 400},
///            {"at_tick": 100, "action": "select_city", "city_id": "seoul"},
///            {"at_tick": 120, "action": "idle"}]}
/// "repeat" expands a move over consecutive ticks. Ticks must be >= 1 and strictly increasing.
/// An action at tick k behaves like client input received after frame k: record k + 1 is the
/// first to reflect it.
inline WalkScript parse_walk_script(std::string_view text) {
    const Json doc = parse_json_text(text);
    ObjectReader top(doc, "", {"steps"});
    const Json& steps = top.array("steps");
    WalkScript script;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const std::string path = indexed("steps", i);
        ObjectReader r(steps[i], path, {"at_tick", "action", "ds", "dtheta", "repeat", "city_id"});
        const std::int64_t at = r.integer("at_tick");
        const std::string action = r.str("action");
        if (action == "move") {
            const VirtDelta d{r.num("ds"), r.has("dtheta") ? r.num("dtheta") : 0.0};
            check_delta(d);
            const std::int64_t repeat = r.has("repeat") ? r.integer("repeat") : 1;
            if (repeat < 1) throw Error(ErrorCode::schema, r.child("repeat") + ": must be >= 1");
            for (std::int64_t k = 0; k < repeat; ++k) script.steps.push_back({at + k, d});
        } else if (action == "select_city") {
            script.steps.push_back({at, SelectCity{r.str("city_id")}});
        } else if (action == "idle") {
            script.steps.push_back({at, Idle{}});
        } else {
            throw Error(ErrorCode::schema, r.child("action") + ": expected move, select_city or idle");
        }
    }
    for (std::size_t i = 0; i < script.steps.size(); ++i) {
        if (script.steps[i].at_tick < 1) throw Error(ErrorCode::schema, "steps: at_tick must be >= 1");
        if (i > 0 && script.steps[i].at_tick <= script.steps[i - 1].at_tick)
            throw Error(ErrorCode::schema,
                        "steps: at_tick must strictly increase (tick " + std::to_string(script.steps[i].at_tick) + ")");
    }
    return script;
}

struct HarnessConfig {
    EngineConfig engine;
    CompressionConfig compression;
    Workspace workspace;
    std::vector<SensorConfig> sensors = sensor_ring();
    std::int64_t ticks = 300;
    Pose virt_start{{0.0, 0.0, kEyeHeight}, 0.0};
};

struct TraceRecord {
    std::int64_t tick = 0;
    VirtDelta delta;
    TickFrame frame;
    MappingSnapshot mapping;
    std::optional<FusedEstimate> estimate;
    Pose true_pose;
    double kappa_injected = 0.0;

    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct Trace {
    OJson header;
    std::vector<TraceRecord> records;
};

// --- serialization -----------------------------------------------------------------------

inline OJson tick_frame_to_json(const TickFrame& f) {
    OJson j = OJson::object();
    j["t_ticks"] = f.t_ticks;
    j["time"] = f.time;
    j["surfaces"] = protocol::surfaces_to_json(f.surfaces);
    j["speaker_gains"] = protocol::gains_to_json(f.speaker_gains);
    OJson menu = OJson::object();
    menu["options"] = protocol::options_to_json(f.menu.options);
    menu["selected_city"] = protocol::optional_string(f.menu.selected_city);
    j["menu"] = std::move(menu);
    j["user_virtual_pose"] = pose_to_json(f.user_virtual_pose);
    return j;
}

inline TickFrame tick_frame_from_json(const Json& j, const std::string& path) {
    ObjectReader r(j, path, {"t_ticks", "time", "surfaces", "speaker_gains", "menu", "user_virtual_pose"});
    ObjectReader menu(r.at("menu"), r.child("menu"), {"options", "selected_city"});
    TickFrame f;
    f.t_ticks = r.integer("t_ticks");
    f.time = r.num("time");
    f.surfaces = protocol::surfaces_from_json(r.at("surfaces"), r.child("surfaces"));
    f.speaker_gains = protocol::gains_from_json(r.at("speaker_gains"), r.child("speaker_gains"));
    f.menu.options = protocol::options_from_json(menu.at("options"), menu.child("options"));
    f.menu.selected_city = protocol::optional_string_from(menu, "selected_city");
    f.user_virtual_pose = pose_from_json(r.at("user_virtual_pose"), r.child("user_virtual_pose"));
    return f;
}

inline OJson record_to_json(const TraceRecord& rec) {
    OJson j = OJson::object();
    j["type"] = "record";
    j["tick"] = rec.tick;
    OJson delta = OJson::object();
    delta["ds"] = rec.delta.ds;
    delta["dtheta"] = rec.delta.dtheta;
    j["delta"] = std::move(delta);
    j["frame"] = tick_frame_to_json(rec.frame);
    OJson mapping = OJson::object();
    mapping["virt_pose"] = pose_to_json(rec.mapping.virt_pose);
    mapping["phys_pose"] = pose_to_json(rec.mapping.phys_pose);
    mapping["heading_offset"] = rec.mapping.heading_offset;
    j["mapping"] = std::move(mapping);
    if (rec.estimate) {
        OJson e = OJson::object();
        e["pose"] = pose_to_json(rec.estimate->pose);
        e["var_pos"] = rec.estimate->var_pos;
        e["var_yaw"] = rec.estimate->var_yaw;
        e["used_sensors"] = rec.estimate->used_sensors;
        j["estimate"] = std::move(e);
    } else {
        j["estimate"] = nullptr;
    }
    j["true_pose"] = pose_to_json(rec.true_pose);
    j["kappa_injected"] = rec.kappa_injected;
    return j;
}

inline TraceRecord record_from_json(const Json& j, const std::string& path) {
    ObjectReader r(j, path,
                   {"type", "tick", "delta", "frame", "mapping", "estimate", "true_pose", "kappa_injected"});
    if (r.str("type") != "record") throw Error(ErrorCode::schema, r.child("type") + ": expected \"record\"");
    TraceRecord rec;
    rec.tick = r.integer("tick");
    ObjectReader delta(r.at("delta"), r.child("delta"), {"ds", "dtheta"});
    rec.delta = {delta.num("ds"), delta.num("dtheta")};
    rec.frame = tick_frame_from_json(r.at("frame"), r.child("frame"));
    ObjectReader mapping(r.at("mapping"), r.child("mapping"), {"virt_pose", "phys_pose", "heading_offset"});
    rec.mapping.virt_pose = pose_from_json(mapping.at("virt_pose"), mapping.child("virt_pose"));
    rec.mapping.phys_pose = pose_from_json(mapping.at("phys_pose"), mapping.child("phys_pose"));
    rec.mapping.heading_offset = mapping.num("heading_offset");
    if (!r.at("estimate").is_null()) {
        ObjectReader e(r.at("estimate"), r.child("estimate"), {"pose", "var_pos", "var_yaw", "used_sensors"});
        FusedEstimate est;
        est.pose = pose_from_json(e.at("pose"), e.child("pose"));
        est.var_pos = e.num("var_pos");
        est.var_yaw = e.num("var_yaw");
        est.used_sensors = protocol::wire_strings(e.array("used_sensors"), e.child("used_sensors"));
        rec.estimate = std::move(est);
    }
    rec.true_pose = pose_from_json(r.at("true_pose"), r.child("true_pose"));
    rec.kappa_injected = r.num("kappa_injected");
    return rec;
}

inline std::string record_line(const TraceRecord& rec) { return record_to_json(rec).dump() + "\n"; }

inline std::string serialize_trace(const Trace& trace) {
    std::string out = trace.header.dump() + "\n";
    for (const auto& rec : trace.records) out += record_line(rec);
    return out;
}

inline Trace parse_trace(std::string_view text) {
    Trace trace;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const Json doc = parse_json_text(line);
        if (lineno == 1) {
            if (!doc.is_object() || doc.value("type", "") != "header")
                throw Error(ErrorCode::schema, "line 1: expected trace header");
            trace.header = doc;
            continue;
        }
        trace.records.push_back(record_from_json(doc, "line " + std::to_string(lineno)));
    }
    if (trace.header.is_null()) throw Error(ErrorCode::empty_trace, "empty trace");
    return trace;
}

inline void write_trace(const Trace& trace, const std::filesystem::path& path) {
    write_file(path, serialize_trace(trace));
}
inline Trace read_trace(const std::filesystem::path& path) { return parse_trace(read_file(path)); }

inline std::uint64_t trace_hash(const Trace& trace) {
    Fnv1a64 h;
    for (const auto& rec : trace.records) h.update(record_line(rec));
    return h.digest();
}

inline OJson harness_header(const SceneManifest& manifest, const HarnessConfig& cfg, std::uint64_t seed) {
    OJson h = OJson::object();
    h["type"] = "header";
    h["format"] = "einstall-trace/1";
    h["scene_id"] = manifest.scene_id;
    h["ticks"] = cfg.ticks;
    OJson seeds = OJson::object();
    seeds["sensor"] = seed;
    seeds["engine"] = cfg.engine.rng_seed;
    h["seeds"] = std::move(seeds);
    OJson c = OJson::object();
    c["tick_rate"] = cfg.engine.tick_rate;
    c["delay_emulation"] = cfg.engine.delay_emulation;
    c["delay_offset"] = cfg.engine.delay_offset;
    c["kappa_max"] = cfg.compression.kappa_max;
    c["steer_gain"] = cfg.compression.steer_gain;
    c["predictor_horizon"] = cfg.compression.predictor_horizon;
    c["forced_kappa"] = cfg.compression.forced_kappa ? OJson(*cfg.compression.forced_kappa) : OJson(nullptr);
    OJson ws = OJson::object();
    ws["width"] = cfg.workspace.width;
    ws["depth"] = cfg.workspace.depth;
    c["workspace"] = std::move(ws);
    c["virt_start"] = pose_to_json(cfg.virt_start);
    c["sensors"] = sensors_to_json(cfg.sensors)["sensors"];
    h["config"] = std::move(c);
    return h;
}

// --- running -----------------------------------------------------------------------------

inline Trace run_scripted(const SceneManifest& manifest, std::shared_ptr<const Capsule> capsule,
                          const WalkScript& script, const HarnessConfig& cfg, std::uint64_t seed) {
    if (cfg.ticks < 1) throw Error(ErrorCode::bad_input, "tick count must be >= 1");
    for (const auto& step : script.steps) {
        if (step.at_tick > cfg.ticks)
            throw Error(ErrorCode::bad_input, "script step at tick " + std::to_string(step.at_tick) +
                                                  " exceeds requested tick count");
        if (const auto* sel = std::get_if<SelectCity>(&step.action)) {
            if (manifest.widgets.empty()) throw Error(ErrorCode::no_menu_widget, "no menu widget");
            bool known = false;
            for (const auto& w : manifest.widgets)
                for (const auto& opt : w.options) known = known || opt.city_id == sel->city_id;
            if (!known) throw Error(ErrorCode::unknown_city, "script selects unknown city \"" + sel->city_id + "\"");
        }
    }

    EngineState engine = init_engine(manifest, std::move(capsule), cfg.engine);
    MappingState mapping = reset_mapping(cfg.workspace, cfg.virt_start);
    engine = handle_input(std::move(engine), SetPose{mapping.virt_pose});
    SplitMix64 rng(seed);

    Trace trace;
    trace.header = harness_header(manifest, cfg, seed);
    trace.records.reserve(static_cast<std::size_t>(cfg.ticks));
    std::size_t next = 0;
    for (std::int64_t k = 1; k <= cfg.ticks; ++k) {
        // An action stamped at tick k - 1 arrived after record k - 1, so it shapes record k.
        VirtDelta delta{};
        if (next < script.steps.size() && script.steps[next].at_tick == k - 1) {
            const auto& action = script.steps[next++].action;
            if (const auto* d = std::get_if<VirtDelta>(&action)) delta = *d;
            if (const auto* sel = std::get_if<SelectCity>(&action)) engine = handle_input(std::move(engine), *sel);
        }
        const auto step = compress_step(mapping, delta, cfg.compression, cfg.workspace);
        mapping = step.mapping;

        const double time = static_cast<double>(k) / cfg.engine.tick_rate;
        const auto readings = simulate_readings(mapping.phys_pose, cfg.sensors, rng, time);
        std::optional<FusedEstimate> estimate;
        try {
            estimate = fuse(readings);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::tracking_lost) throw;
        }

        engine = handle_input(std::move(engine), SetPose{mapping.virt_pose});
        auto [next_engine, frame] = tick(std::move(engine));
        engine = std::move(next_engine);

        trace.records.push_back(
            {k, delta, std::move(frame), mapping_snapshot(mapping), std::move(estimate), mapping.phys_pose,
             step.kappa_injected});
    }
    return trace;
}

// --- metrics -----------------------------------------------------------------------------

struct MetricsReport {
    double tracking_rmse_pos = 0.0;
    double tracking_rmse_yaw = 0.0;
    double max_phys_excursion = 0.0;
    std::int64_t containment_violations = 0;
    double kappa_saturation_fraction = 0.0;  // among ticks that moved
    std::int64_t frames = 0;
    std::int64_t tracking_lost_ticks = 0;
    std::string trace_hash;

    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

inline MetricsReport compute_metrics(const Trace& trace) {
    if (trace.records.empty()) throw Error(ErrorCode::empty_trace, "empty trace");
    Workspace ws;
    double kappa_max = CompressionConfig{}.kappa_max;
    if (trace.header.contains("config")) {
        const auto& c = trace.header["config"];
        ws.width = c["workspace"]["width"].get<double>();
        ws.depth = c["workspace"]["depth"].get<double>();
        kappa_max = c["kappa_max"].get<double>();
    }

    MetricsReport m;
    double se_pos = 0.0, se_yaw = 0.0;
    std::int64_t tracked = 0, moving = 0, saturated = 0;
    for (const auto& rec : trace.records) {
        if (rec.estimate) {
            const Vec3 e = rec.estimate->pose.position - rec.true_pose.position;
            se_pos += e.x * e.x + e.y * e.y + e.z * e.z;
            const double ey = wrap_angle(rec.estimate->pose.yaw - rec.true_pose.yaw);
            se_yaw += ey * ey;
            ++tracked;
        } else {
            ++m.tracking_lost_ticks;
        }
        const Vec3 phys = rec.mapping.phys_pose.position;
        m.max_phys_excursion = std::max(m.max_phys_excursion, std::hypot(phys.x, phys.y));
        if (!ws.contains(phys)) ++m.containment_violations;
        if (rec.delta.ds > 0.0) {
            ++moving;
            if (std::abs(rec.kappa_injected) >= kappa_max - 1e-12) ++saturated;
        }
    }
    if (tracked > 0) {
        m.tracking_rmse_pos = std::sqrt(se_pos / static_cast<double>(tracked));
        m.tracking_rmse_yaw = std::sqrt(se_yaw / static_cast<double>(tracked));
    }
    m.kappa_saturation_fraction = moving > 0 ? static_cast<double>(saturated) / static_cast<double>(moving) : 0.0;
    m.frames = static_cast<std::int64_t>(trace.records.size());
    m.trace_hash = hex64(trace_hash(trace));
    return m;
}

inline OJson metrics_to_json(const MetricsReport& m) {
    OJson j = OJson::object();
    j["tracking_rmse_pos"] = m.tracking_rmse_pos;
    j["tracking_rmse_yaw"] = m.tracking_rmse_yaw;
    j["max_phys_excursion"] = m.max_phys_excursion;
    j["containment_violations"] = m.containment_violations;
    j["kappa_saturation_fraction"] = m.kappa_saturation_fraction;
    j["frames"] = m.frames;
    j["tracking_lost_ticks"] = m.tracking_lost_ticks;
    j["trace_hash"] = m.trace_hash;
    return j;
}

}  // namespace einstall
