// Copyright 2026 The einstall Authors
// SPDX-License-Identifier: Apache-2.0

// Motion compression: an unbounded virtual walk is replayed in a bounded physical workspace
// with the same arc length, while a bounded extra curvature steers the walker back toward the
// workspace center. A straight virtual line thus becomes a curved physical path.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "einstall/core.hpp"

namespace einstall {

struct Workspace {
    double width = 2.5;  // along x
    double depth = 2.0;  // along y

    [[nodiscard]] double area() const { return width * depth; }
    [[nodiscard]] bool contains(const Vec3& p) const {
        return std::abs(p.x) <= width / 2 && std::abs(p.y) <= depth / 2;
    }
};

struct CompressionConfig {
    double kappa_max = 2.5;   // 1/m
    double steer_gain = 2.5;  // 1/m
    double predictor_horizon = 2.0;
    // Test hook: inject exactly this curvature (still clamped to kappa_max).
    std::optional<double> forced_kappa;
};

struct MappingState {
    Pose phys_pose;
    Pose virt_pose;
    double heading_offset = 0.0;  // phys yaw - virt yaw, wrapped

    friend bool operator==(const MappingState&, const MappingState&) = default;
};

struct VirtDelta {
    double ds = 0.0;      // arc length walked this step
    double dtheta = 0.0;  // virtual heading change this step

    friend bool operator==(const VirtDelta&, const VirtDelta&) = default;
};

inline constexpr double kMaxStepLength = 0.2;
inline constexpr double kStraightTurn = 1e-12;

inline void check_delta(const VirtDelta& d) {
    if (!std::isfinite(d.ds) || d.ds < 0.0 || d.ds > kMaxStepLength)
        throw Error(ErrorCode::bad_input, "ds must lie in [0, 0.2] m");
    if (!std::isfinite(d.dtheta)) throw Error(ErrorCode::bad_input, "dtheta must be finite");
}

/// Exact unicycle step: a straight segment, or a circular arc of length ds turning by dturn.
/// Uses the chord form (chord = ds * sin(h)/h along yaw + h, h = dturn/2), which stays accurate
/// for tiny turns where the radius form cancels catastrophically.
inline Pose integrate_arc(const Pose& p, double ds, double dturn) {
    double chord = ds;
    if (std::abs(dturn) >= kStraightTurn) {
        const double h = dturn / 2;
        chord = ds * std::sin(h) / h;
    }
    const double dir = p.yaw + dturn / 2;
    Pose out = p;
    out.position.x += chord * std::cos(dir);
    out.position.y += chord * std::sin(dir);
    out.yaw = wrap_angle(p.yaw + dturn);
    return out;
}

inline MappingState reset_mapping(const Workspace& /*workspace*/, const Pose& virt_start) {
    MappingState m;
    m.phys_pose = {{0.0, 0.0, virt_start.position.z}, 0.0};
    m.virt_pose = {virt_start.position, wrap_angle(virt_start.yaw)};
    m.heading_offset = wrap_angle(m.phys_pose.yaw - m.virt_pose.yaw);
    return m;
}

/// Center-seeking steering signal in [-1, 1]: sin of the angle from the heading to the center
/// direction while the center lies ahead, saturated at +/-1 while it lies behind (+1 when
/// exactly behind). Zero at the center itself.
inline double steering_signal(const Pose& phys) {
    const double r = std::hypot(phys.position.x, phys.position.y);
    if (r < 1e-9) return 0.0;
    const double ux = -phys.position.x / r, uy = -phys.position.y / r;
    const double hx = std::cos(phys.yaw), hy = std::sin(phys.yaw);
    const double cross = hx * uy - hy * ux;
    const double dot = hx * ux + hy * uy;
    if (dot >= 0.0) return cross;
    return cross >= 0.0 ? 1.0 : -1.0;
}

struct CompressionStep {
    MappingState mapping;
    double kappa_injected = 0.0;
};

inline CompressionStep compress_step(const MappingState& mapping, const VirtDelta& delta,
                                     const CompressionConfig& config, const Workspace& /*workspace*/) {
    check_delta(delta);
    const double raw = config.forced_kappa ? *config.forced_kappa : config.steer_gain * steering_signal(mapping.phys_pose);
    const double kappa = std::clamp(raw, -config.kappa_max, config.kappa_max);

    CompressionStep out;
    out.kappa_injected = kappa;
    out.mapping.virt_pose = integrate_arc(mapping.virt_pose, delta.ds, delta.dtheta);
    out.mapping.phys_pose = integrate_arc(mapping.phys_pose, delta.ds, delta.dtheta + kappa * delta.ds);
    out.mapping.heading_offset = wrap_angle(out.mapping.phys_pose.yaw - out.mapping.virt_pose.yaw);
    return out;
}

struct MappingSnapshot {
    Pose virt_pose;
    Pose phys_pose;
    double heading_offset = 0.0;

    friend bool operator==(const MappingSnapshot&, const MappingSnapshot&) = default;
};

inline MappingSnapshot mapping_snapshot(const MappingState& m) { return {m.virt_pose, m.phys_pose, m.heading_offset}; }

inline constexpr double kPathSampleSpacing = 0.25;
inline constexpr double kStationaryThreshold = 1e-3;

/// Straight-line extrapolation from the latest pose along its heading, sampled every 0.25 m up
/// to the horizon. A history that moved less than 1 mm yields just the current position.
inline std::vector<Vec3> predict_path(std::span<const Pose> history, double horizon) {
    if (history.empty()) return {};
    const Pose& last = history.back();
    if (history.size() < 2 || planar_distance(history.front().position, last.position) < kStationaryThreshold)
        return {last.position};
    std::vector<Vec3> out;
    const auto n = static_cast<int>(std::floor(horizon / kPathSampleSpacing + 1e-9));
    for (int i = 1; i <= n; ++i) {
        const double s = kPathSampleSpacing * i;
        out.push_back(last.position + Vec3{s * std::cos(last.yaw), s * std::sin(last.yaw), 0.0});
    }
    return out;
}

}  // namespace einstall
