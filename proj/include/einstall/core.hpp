// Copyright 2026 The einstall Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace einstall {

enum class ErrorCode {
    syntax,
    schema,
    dangling_reference,
    unknown_scene,
    insufficient_basis,
    missing_index,
    malformed_index,
    unresolvable_uri,
    unknown_key,
    missing_sidecar,
    empty_slot,
    capsule_required,
    no_menu_widget,
    unknown_city,
    tracking_lost,
    bad_input,
    malformed,
    unknown_type,
    missing_field,
    bad_version,
    empty_trace,
    io,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::syntax: return "syntax";
        case ErrorCode::schema: return "schema";
        case ErrorCode::dangling_reference: return "dangling_reference";
        case ErrorCode::unknown_scene: return "unknown_scene";
        case ErrorCode::insufficient_basis: return "insufficient_basis";
        case ErrorCode::missing_index: return "missing_index";
        case ErrorCode::malformed_index: return "malformed_index";
        case ErrorCode::unresolvable_uri: return "unresolvable_uri";
        case ErrorCode::unknown_key: return "unknown_key";
        case ErrorCode::missing_sidecar: return "missing_sidecar";
        case ErrorCode::empty_slot: return "empty_slot";
        case ErrorCode::capsule_required: return "capsule_required";
        case ErrorCode::no_menu_widget: return "no_menu_widget";
        case ErrorCode::unknown_city: return "unknown_city";
        case ErrorCode::tracking_lost: return "tracking_lost";
        case ErrorCode::bad_input: return "bad_input";
        case ErrorCode::malformed: return "malformed";
        case ErrorCode::unknown_type: return "unknown_type";
        case ErrorCode::missing_field: return "missing_field";
        case ErrorCode::bad_version: return "bad_version";
        case ErrorCode::empty_trace: return "empty_trace";
        case ErrorCode::io: return "io";
    }
    return "unknown";
}

/// Every failure surfaced by the library. The code is stable and machine-readable,
/// the message names the offending id, path or position.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message) : std::runtime_error(message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const Vec3&, const Vec3&) = default;

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, Vec3 v) { return {s * v.x, s * v.y, s * v.z}; }

    [[nodiscard]] bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline double norm(Vec3 v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }
inline double distance(Vec3 a, Vec3 b) { return norm(a - b); }
inline double planar_distance(Vec3 a, Vec3 b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Maps any finite angle to [-pi, pi).
inline double wrap_angle(double a) {
    if (a >= -kPi && a < kPi) return a;  // exact identity in range
    double r = std::fmod(a + kPi, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    r -= kPi;
    if (r >= kPi) r -= kTwoPi;
    return r;
}

inline bool yaw_in_range(double yaw) { return std::isfinite(yaw) && yaw >= -kPi && yaw < kPi; }

/// Head pose; orientation is yaw about +z, measured from +x.
struct Pose {
    Vec3 position;
    double yaw = 0.0;

    friend bool operator==(const Pose&, const Pose&) = default;
};

/// Euclidean modulo for integers: result in [0, m) for m > 0.
inline std::int64_t euclid_mod(std::int64_t a, std::int64_t m) {
    std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

/// floor() that absorbs rounding noise just below an integer, so that values which are
/// integers in exact arithmetic (e.g. 0.2 * 25) floor to that integer.
inline double floor_snap(double x) { return std::floor(x + 1e-7); }

}  // namespace einstall
