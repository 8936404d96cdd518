// Copyright 2026 The einstall Authors
// SPDX-License-Identifier: Apache-2.0

// Simulated multi-sensor head tracking: field-of-view visibility, Gaussian measurement noise,
// inverse-variance fusion and variance-minimizing sensor subset selection.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "einstall/core.hpp"
#include "einstall/json_util.hpp"
#include "einstall/rng.hpp"

namespace einstall {

struct SensorConfig {
    std::string sensor_id;
    Vec3 position;
    double facing_yaw = 0.0;
    double fov = kPi / 2;  // full opening angle, (0, pi]
    double max_range = 4.0;
    double noise_std_pos = 0.02;
    double noise_std_yaw = 0.03;

    friend bool operator==(const SensorConfig&, const SensorConfig&) = default;
};

struct SensorReading {
    std::string sensor_id;
    double t = 0.0;
    Pose measured;  // meaningless when !visible
    bool visible = false;
    double noise_std_pos = 0.0;
    double noise_std_yaw = 0.0;
};

struct FusedEstimate {
    Pose pose;
    double var_pos = 0.0;
    double var_yaw = 0.0;
    std::vector<std::string> used_sensors;

    friend bool operator==(const FusedEstimate&, const FusedEstimate&) = default;
};

// Standard deviations below this are treated as this value when forming weights.
inline constexpr double kMinNoiseStd = 1e-9;
inline constexpr double kFovTolerance = 1e-12;

/// Inclusive field-of-view and range test in the horizontal plane (range is 3D).
inline bool sensor_sees(const SensorConfig& s, const Vec3& target) {
    const double d = distance(s.position, target);
    if (d > s.max_range) return false;
    if (planar_distance(s.position, target) == 0.0) return false;
    const double bearing = std::atan2(target.y - s.position.y, target.x - s.position.x);
    return std::abs(wrap_angle(bearing - s.facing_yaw)) <= s.fov / 2 + kFovTolerance;
}

/// One reading per sensor, in sensor order. Visible sensors draw Gaussian noise in the
/// order x, y, z, yaw; hidden sensors draw nothing.
inline std::vector<SensorReading> simulate_readings(const Pose& true_pose, std::span<const SensorConfig> sensors,
                                                    SplitMix64& rng, double t = 0.0) {
    std::vector<SensorReading> out;
    out.reserve(sensors.size());
    for (const auto& s : sensors) {
        SensorReading r{s.sensor_id, t, {}, false, s.noise_std_pos, s.noise_std_yaw};
        if (sensor_sees(s, true_pose.position)) {
            r.visible = true;
            const double nx = s.noise_std_pos * rng.gaussian();
            const double ny = s.noise_std_pos * rng.gaussian();
            const double nz = s.noise_std_pos * rng.gaussian();
            const double nyaw = s.noise_std_yaw * rng.gaussian();
            r.measured.position = true_pose.position + Vec3{nx, ny, nz};
            r.measured.yaw = wrap_angle(true_pose.yaw + nyaw);
        }
        out.push_back(std::move(r));
    }
    return out;
}

inline double fusion_weight(double std_dev) {
    const double s = std::max(std_dev, kMinNoiseStd);
    return 1.0 / (s * s);
}

/// Static inverse-variance fusion. Position is the weighted mean per axis, yaw the weighted
/// circular mean; both are formed relative to the first visible reading so identical readings
/// reproduce it exactly.
inline FusedEstimate fuse(std::span<const SensorReading> readings) {
    std::vector<const SensorReading*> used;
    for (const auto& r : readings)
        if (r.visible) used.push_back(&r);
    if (used.empty()) throw Error(ErrorCode::tracking_lost, "tracking lost");

    const Pose& ref = used.front()->measured;
    double wp_sum = 0.0, wy_sum = 0.0;
    Vec3 acc{};
    double s_acc = 0.0, c_acc = 0.0;
    for (const auto* r : used) {
        const double wp = fusion_weight(r->noise_std_pos);
        const double wy = fusion_weight(r->noise_std_yaw);
        wp_sum += wp;
        wy_sum += wy;
        acc = acc + wp * (r->measured.position - ref.position);
        const double dy = r->measured.yaw - ref.yaw;
        s_acc += wy * std::sin(dy);
        c_acc += wy * std::cos(dy);
    }
    FusedEstimate e;
    e.pose.position = ref.position + (1.0 / wp_sum) * acc;
    e.pose.yaw = wrap_angle(ref.yaw + std::atan2(s_acc, c_acc));
    e.var_pos = 1.0 / wp_sum;
    e.var_yaw = 1.0 / wy_sum;
    for (const auto* r : used) e.used_sensors.push_back(r->sensor_id);
    std::sort(e.used_sensors.begin(), e.used_sensors.end());
    return e;
}

/// Picks the k predicted-visible sensors whose fused position variance is smallest. Since the
/// variance is 1 / sum(1/std^2) this is the k smallest stds; ties go to smaller ids, which gives
/// the lexicographically smallest id list among optimal subsets. Returns sorted ids.
inline std::vector<std::string> schedule_sensors(std::span<const SensorConfig> sensors, const Pose& predicted_pose,
                                                 std::size_t k) {
    std::vector<const SensorConfig*> visible;
    for (const auto& s : sensors)
        if (sensor_sees(s, predicted_pose.position)) visible.push_back(&s);
    std::sort(visible.begin(), visible.end(), [](const SensorConfig* a, const SensorConfig* b) {
        const double wa = fusion_weight(a->noise_std_pos), wb = fusion_weight(b->noise_std_pos);
        if (wa != wb) return wa > wb;
        return a->sensor_id < b->sensor_id;
    });
    if (visible.size() > k) visible.resize(k);
    std::vector<std::string> ids;
    for (const auto* s : visible) ids.push_back(s->sensor_id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

/// Fused position variance of a sensor subset under noise-free geometry.
inline double subset_position_variance(std::span<const SensorConfig* const> subset) {
    double w = 0.0;
    for (const auto* s : subset) w += fusion_weight(s->noise_std_pos);
    return 1.0 / w;
}

// --- fixture -----------------------------------------------------------------------------

struct RingOptions {
    double width = 2.5;
    double depth = 2.0;
    double mount_height = 2.0;
    double fov = 70.0 * kPi / 180.0;
    double max_range = 4.0;
    double noise_std_pos = 0.02;
    double noise_std_yaw = 0.03;
};

/// Eight sensors evenly spaced along the workspace perimeter (counter-clockwise from the
/// (-w/2, -d/2) corner), each facing the workspace center.
inline std::vector<SensorConfig> sensor_ring(const RingOptions& o = {}) {
    const double hw = o.width / 2, hd = o.depth / 2;
    const double perimeter = 2 * (o.width + o.depth);
    std::vector<SensorConfig> out;
    for (int i = 0; i < 8; ++i) {
        double s = perimeter * i / 8.0;
        Vec3 p{};
        if (s < o.width) {
            p = {-hw + s, -hd, o.mount_height};
        } else if ((s -= o.width) < o.depth) {
            p = {hw, -hd + s, o.mount_height};
        } else if ((s -= o.depth) < o.width) {
            p = {hw - s, hd, o.mount_height};
        } else {
            s -= o.width;
            p = {-hw, hd - s, o.mount_height};
        }
        out.push_back({"kinect_" + std::to_string(i + 1), p, std::atan2(-p.y, -p.x), o.fov, o.max_range,
                       o.noise_std_pos, o.noise_std_yaw});
    }
    return out;
}

inline OJson sensors_to_json(std::span<const SensorConfig> sensors) {
    OJson arr = OJson::array();
    for (const auto& s : sensors) {
        OJson o = OJson::object();
        o["sensor_id"] = s.sensor_id;
        o["position"] = vec3_to_json(s.position);
        o["facing_yaw"] = s.facing_yaw;
        o["fov"] = s.fov;
        o["max_range"] = s.max_range;
        o["noise_std_pos"] = s.noise_std_pos;
        o["noise_std_yaw"] = s.noise_std_yaw;
        arr.push_back(std::move(o));
    }
    OJson doc = OJson::object();
    doc["sensors"] = std::move(arr);
    return doc;
}

inline std::vector<SensorConfig> parse_sensors(std::string_view text) {
    const Json doc = parse_json_text(text);
    ObjectReader top(doc, "", {"sensors"});
    const Json& arr = top.array("sensors");
    std::vector<SensorConfig> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        ObjectReader r(arr[i], indexed("sensors", i),
                       {"sensor_id", "position", "facing_yaw", "fov", "max_range", "noise_std_pos", "noise_std_yaw"});
        SensorConfig s{r.str("sensor_id"),
                       vec3_from_json(r.at("position"), r.child("position")),
                       r.num("facing_yaw"),
                       r.num("fov"),
                       r.num("max_range"),
                       r.num("noise_std_pos"),
                       r.num("noise_std_yaw")};
        if (!(s.fov > 0.0 && s.fov <= kPi)) throw Error(ErrorCode::schema, r.child("fov") + ": must lie in (0, pi]");
        if (!(s.max_range > 0.0)) throw Error(ErrorCode::schema, r.child("max_range") + ": must be > 0");
        if (!(s.noise_std_pos >= 0.0 && s.noise_std_yaw >= 0.0))
            throw Error(ErrorCode::schema, r.path() + ": noise stds must be >= 0");
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace einstall
