// Copyright 2026 The einstall Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "einstall/tracking.hpp"
#include "support.hpp"

namespace einstall {
namespace {

SensorReading reading(std::string id, Vec3 p, double yaw, double sp = 0.02, double sy = 0.03) {
    return {std::move(id), 0.0, {p, yaw}, true, sp, sy};
}

TEST(Visibility, BehindAllSensors) {
    std::vector<SensorConfig> sensors;
    for (int i = 0; i < 4; ++i)
        sensors.push_back({"s" + std::to_string(i), {0.0, 0.5 * i, 2.0}, 0.0, 70.0 * kPi / 180, 4.0, 0.02, 0.03});
    SplitMix64 rng(1);
    for (const auto& r : simulate_readings({{-1.0, 0.7, 1.7}, 0.0}, sensors, rng)) EXPECT_FALSE(r.visible);
    EXPECT_EQ(rng.state(), SplitMix64(1).state());
}

TEST(Visibility, FovBoundaryIsInclusive) {
    const SensorConfig s{"s", {0, 0, 0}, 0.0, kPi / 2, 10.0, 0.0, 0.0};
    EXPECT_TRUE(sensor_sees(s, {1.0, 1.0, 0.0}));
    EXPECT_TRUE(sensor_sees(s, {1.0, -1.0, 0.0}));
    EXPECT_FALSE(sensor_sees(s, {1.0, 1.0 + 1e-6, 0.0}));
    // Range boundary is inclusive too, and measured in 3D.
    EXPECT_TRUE(sensor_sees(s, {10.0, 0.0, 0.0}));
    EXPECT_FALSE(sensor_sees(s, {10.0, 0.0, 0.5}));
}

TEST(Visibility, FovAcrossTheWrap) {
    const SensorConfig s{"s", {0, 0, 0}, kPi - 0.1, 0.6, 10.0, 0.0, 0.0};
    EXPECT_TRUE(sensor_sees(s, {-1.0, -0.1, 0.0}));  // bearing just past -pi + 0.1
    EXPECT_FALSE(sensor_sees(s, {1.0, 0.0, 0.0}));
}

TEST(SimulateReadings, ZeroNoiseIsExact) {
    auto ring = sensor_ring(RingOptions{2.5, 2.0, 2.0, 70.0 * kPi / 180, 4.0, 0.0, 0.0});
    SplitMix64 rng(5);
    const Pose truth{{0.3, -0.2, 1.7}, 2.5};
    int visible = 0;
    for (const auto& r : simulate_readings(truth, ring, rng, 1.5)) {
        EXPECT_EQ(r.t, 1.5);
        if (!r.visible) continue;
        ++visible;
        EXPECT_EQ(r.measured, truth);
    }
    EXPECT_GT(visible, 0);
    const auto fused = fuse(simulate_readings(truth, ring, rng));
    EXPECT_EQ(fused.pose, truth);
}

TEST(SimulateReadings, DrawOrderOracle) {
    const auto ring = sensor_ring();
    const Pose truth{{0.9, 0.7, 1.7}, -1.0};
    SplitMix64 rng(2718);
    const auto readings = simulate_readings(truth, ring, rng);

    SplitMix64 oracle(2718);
    for (std::size_t i = 0; i < ring.size(); ++i) {
        const auto& s = ring[i];
        const double dx = truth.position.x - s.position.x, dy = truth.position.y - s.position.y;
        const double dz = truth.position.z - s.position.z;
        double off = std::atan2(dy, dx) - s.facing_yaw;
        while (off > kPi) off -= 2 * kPi;
        while (off < -kPi) off += 2 * kPi;
        const bool sees = std::sqrt(dx * dx + dy * dy + dz * dz) <= s.max_range && std::abs(off) <= s.fov / 2;
        ASSERT_EQ(readings[i].visible, sees) << s.sensor_id;
        ASSERT_EQ(readings[i].sensor_id, s.sensor_id);
        if (!sees) continue;
        const double nx = oracle.gaussian(), ny = oracle.gaussian(), nz = oracle.gaussian(), nyaw = oracle.gaussian();
        EXPECT_EQ(readings[i].measured.position.x, truth.position.x + 0.02 * nx);
        EXPECT_EQ(readings[i].measured.position.y, truth.position.y + 0.02 * ny);
        EXPECT_EQ(readings[i].measured.position.z, truth.position.z + 0.02 * nz);
        EXPECT_EQ(readings[i].measured.yaw, wrap_angle(truth.yaw + 0.03 * nyaw));
    }
    EXPECT_EQ(rng.state(), oracle.state());
}

TEST(Fuse, SingleReading) {
    const std::vector<SensorReading> rs{reading("a", {1, 2, 3}, 0.4, 0.05, 0.1)};
    const auto e = fuse(rs);
    EXPECT_EQ(e.pose, (Pose{{1, 2, 3}, 0.4}));
    EXPECT_DOUBLE_EQ(e.var_pos, 0.0025);
    EXPECT_DOUBLE_EQ(e.var_yaw, 0.01);
    EXPECT_EQ(e.used_sensors, std::vector<std::string>{"a"});
}

TEST(Fuse, SymmetricAverage) {
    const std::vector<SensorReading> rs{reading("b", {1, 0, 0}, 0.0), reading("a", {3, 0, 0}, 0.0)};
    const auto e = fuse(rs);
    EXPECT_DOUBLE_EQ(e.pose.position.x, 2.0);
    EXPECT_DOUBLE_EQ(e.var_pos, 0.0004 / 2);
    EXPECT_EQ(e.used_sensors, (std::vector<std::string>{"a", "b"}));
}

TEST(Fuse, CircularMeanAcrossPi) {
    const double d170 = 170.0 * kPi / 180;
    const std::vector<SensorReading> rs{reading("a", {}, d170), reading("b", {}, -d170)};
    const auto e = fuse(rs);
    EXPECT_NEAR(std::abs(e.pose.yaw), kPi, 1e-12);
}

TEST(Fuse, HiddenReadingsIgnoredAndLost) {
    std::vector<SensorReading> rs{reading("a", {1, 1, 1}, 0.0)};
    rs.push_back({"b", 0.0, {{100, 100, 100}, 2.0}, false, 0.02, 0.03});
    EXPECT_EQ(fuse(rs).pose.position, (Vec3{1, 1, 1}));
    rs[0].visible = false;
    try {
        fuse(rs);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::tracking_lost);
        EXPECT_STREQ(e.what(), "tracking lost");
    }
}

TEST(Fuse, ZeroStdDominates) {
    const std::vector<SensorReading> rs{reading("a", {1, 0, 0}, 0.0, 0.0, 0.0), reading("b", {3, 0, 0}, 1.0)};
    const auto e = fuse(rs);
    EXPECT_NEAR(e.pose.position.x, 1.0, 1e-9);
    EXPECT_GT(e.var_pos, 0.0);
}

TEST(Fuse, VarianceNeverExceedsBestSensor) {
    SplitMix64 rng(8);
    for (int i = 0; i < 2000; ++i) {
        std::vector<SensorReading> rs;
        const int n = 1 + static_cast<int>(rng.next() % 8);
        double best = 1e300;
        for (int k = 0; k < n; ++k) {
            const double sp = 0.001 + 0.1 * rng.uniform();
            best = std::min(best, sp * sp);
            rs.push_back(reading("s" + std::to_string(k), {rng.gaussian(), rng.gaussian(), rng.gaussian()},
                                 wrap_angle(rng.gaussian()), sp, 0.01 + rng.uniform()));
        }
        const auto e = fuse(rs);
        ASSERT_GT(e.var_pos, 0.0);
        ASSERT_GT(e.var_yaw, 0.0);
        if (n == 1)
            ASSERT_LE(e.var_pos, best * (1 + 1e-12));
        else
            ASSERT_LT(e.var_pos, best);
    }
}

TEST(Fuse, YawIsRotationEquivariant) {
    SplitMix64 rng(11);
    for (int i = 0; i < 2000; ++i) {
        std::vector<SensorReading> rs;
        const int n = 1 + static_cast<int>(rng.next() % 6);
        const double centre = wrap_angle(6.0 * rng.uniform());
        for (int k = 0; k < n; ++k)
            rs.push_back(reading("s" + std::to_string(k), {}, wrap_angle(centre + 0.8 * (rng.uniform() - 0.5)), 0.02,
                                 0.01 + 0.1 * rng.uniform()));
        const double phi = (rng.uniform() - 0.5) * 20.0;
        auto rotated = rs;
        for (auto& r : rotated) r.measured.yaw = wrap_angle(r.measured.yaw + phi);
        const double a = fuse(rs).pose.yaw;
        const double b = fuse(rotated).pose.yaw;
        ASSERT_NEAR(wrap_angle(b - a - phi), 0.0, 1e-9);
    }
}

// Exhaustive scheduling oracle: every size-k subset of visible sensors (or all visible when
// fewer), minimal variance first, then the lexicographically smallest sorted id list.
std::vector<std::string> brute_force_schedule(const std::vector<SensorConfig>& sensors, const Pose& p, std::size_t k) {
    std::vector<const SensorConfig*> visible;
    for (const auto& s : sensors) {
        const double dx = p.position.x - s.position.x, dy = p.position.y - s.position.y;
        const double dz = p.position.z - s.position.z;
        double off = std::atan2(dy, dx) - s.facing_yaw;
        while (off > kPi) off -= 2 * kPi;
        while (off < -kPi) off += 2 * kPi;
        if (std::sqrt(dx * dx + dy * dy + dz * dz) <= s.max_range && std::abs(off) <= s.fov / 2) visible.push_back(&s);
    }
    const std::size_t n = visible.size();
    const std::size_t take = std::min(k, n);
    bool have = false;
    double best_var = 0.0;
    std::vector<std::string> best;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != take) continue;
        std::vector<double> weights;
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1u << i)) {
                weights.push_back(1.0 / (visible[i]->noise_std_pos * visible[i]->noise_std_pos));
                ids.push_back(visible[i]->sensor_id);
            }
        std::sort(weights.begin(), weights.end());
        std::sort(ids.begin(), ids.end());
        double w = 0.0;
        for (double x : weights) w += x;
        const double var = 1.0 / w;
        if (!have || var < best_var || (var == best_var && ids < best)) {
            have = true;
            best_var = var;
            best = ids;
        }
    }
    return best;
}

TEST(ScheduleSensors, MatchesExhaustiveSearchOnRing) {
    const double stds[] = {0.01, 0.02, 0.02, 0.03};
    SplitMix64 rng(31337);
    for (int trial = 0; trial < 100; ++trial) {
        auto ring = sensor_ring();
        for (auto& s : ring) s.noise_std_pos = stds[rng.next() % 4];
        const Pose p{{(rng.uniform() - 0.5) * 2.5, (rng.uniform() - 0.5) * 2.0, 1.7}, 0.0};
        for (std::size_t k = 1; k <= 8; ++k) ASSERT_EQ(schedule_sensors(ring, p, k), brute_force_schedule(ring, p, k));
    }
}

TEST(ScheduleSensors, MatchesExhaustiveSearchOnRandomRigs) {
    SplitMix64 rng(4242);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<SensorConfig> sensors;
        const int n = 1 + static_cast<int>(rng.next() % 8);
        for (int i = 0; i < n; ++i)
            sensors.push_back({"r" + std::to_string(rng.next() % 100), {4 * rng.uniform() - 2, 4 * rng.uniform() - 2, 2},
                               wrap_angle(7 * rng.uniform()), 0.2 + 2.9 * rng.uniform(), 1 + 3 * rng.uniform(),
                               0.01 * (1 + static_cast<double>(rng.next() % 3)), 0.03});
        const Pose p{{rng.uniform() - 0.5, rng.uniform() - 0.5, 1.7}, 0.0};
        for (std::size_t k = 1; k <= sensors.size(); ++k)
            ASSERT_EQ(schedule_sensors(sensors, p, k), brute_force_schedule(sensors, p, k)) << trial << " k=" << k;
    }
}

TEST(ScheduleSensors, Examples) {
    auto ring = sensor_ring();
    const Pose centre{{0, 0, 1.7}, 0};
    auto all = schedule_sensors(ring, centre, 8);
    EXPECT_EQ(all.size(), 8u);
    ring[5].noise_std_pos = 0.01;
    EXPECT_EQ(schedule_sensors(ring, centre, 1), std::vector<std::string>{"kinect_6"});
    ring[5].noise_std_pos = 0.02;
    EXPECT_EQ(schedule_sensors(ring, centre, 1), std::vector<std::string>{"kinect_1"});
    EXPECT_TRUE(schedule_sensors(ring, {{50, 50, 1.7}, 0}, 3).empty());
}

TEST(SensorRing, ShippedFixtureMatches) {
    const std::string text = read_file(test::source_dir() / "sensors" / "ring8.json");
    EXPECT_EQ(text, sensors_to_json(sensor_ring()).dump(2) + "\n");
    const auto parsed = parse_sensors(text);
    EXPECT_EQ(parsed, sensor_ring());
    ASSERT_EQ(parsed.size(), 8u);
    for (const auto& s : parsed) {
        EXPECT_NEAR(s.fov, 70.0 * kPi / 180, 1e-15);
        EXPECT_EQ(s.max_range, 4.0);
        EXPECT_EQ(s.noise_std_pos, 0.02);
        EXPECT_EQ(s.noise_std_yaw, 0.03);
        EXPECT_NEAR(std::abs(s.position.x), 1.25, 1.25);
        EXPECT_TRUE(std::abs(std::abs(s.position.x) - 1.25) < 1e-12 || std::abs(std::abs(s.position.y) - 1.0) < 1e-12)
            << s.sensor_id << " not on the perimeter";
    }
}

TEST(SensorRing, CoversWorkspace) {
    const auto ring = sensor_ring();
    int min_count = 8;
    for (int i = 0; i <= 50; ++i)
        for (int j = 0; j <= 40; ++j) {
            const Vec3 p{-1.25 + 2.5 * i / 50.0, -1.0 + 2.0 * j / 40.0, 1.7};
            int count = 0;
            for (const auto& s : ring) count += sensor_sees(s, p) ? 1 : 0;
            min_count = std::min(min_count, count);
        }
    EXPECT_GE(min_count, 1);
}

TEST(ParseSensors, RejectsBadValues) {
    auto doc = sensors_to_json(sensor_ring());
    doc["sensors"][0]["fov"] = 4.0;
    EXPECT_THROW(parse_sensors(doc.dump()), Error);
    doc = sensors_to_json(sensor_ring());
    doc["sensors"][2]["noise_std_pos"] = -1;
    EXPECT_THROW(parse_sensors(doc.dump()), Error);
}

// Paired Monte-Carlo comparison of fused against best-single-sensor error.
TEST(Fusion, BeatsBestSingleSensorStatistically) {
    const auto ring = sensor_ring();
    SplitMix64 rng(2025);
    SplitMix64 poses(77);
    const int n = 10000;
    double sum_fused = 0, sum_single = 0, sum_d = 0, sum_d2 = 0;
    for (int i = 0; i < n; ++i) {
        const Pose truth{{(poses.uniform() - 0.5) * 2.5, (poses.uniform() - 0.5) * 2.0, 1.7}, 0.0};
        const auto readings = simulate_readings(truth, ring, rng);
        const auto best = schedule_sensors(ring, truth, 1);
        ASSERT_EQ(best.size(), 1u);
        const auto it = std::find_if(readings.begin(), readings.end(),
                                     [&](const SensorReading& r) { return r.sensor_id == best[0]; });
        const Vec3 es = it->measured.position - truth.position;
        const Vec3 ef = fuse(readings).pose.position - truth.position;
        const double s2 = es.x * es.x + es.y * es.y + es.z * es.z;
        const double f2 = ef.x * ef.x + ef.y * ef.y + ef.z * ef.z;
        sum_single += s2;
        sum_fused += f2;
        sum_d += s2 - f2;
        sum_d2 += (s2 - f2) * (s2 - f2);
    }
    const double mean_d = sum_d / n;
    const double sd = std::sqrt(sum_d2 / n - mean_d * mean_d);
    EXPECT_GT(mean_d, 3.0 * sd / std::sqrt(static_cast<double>(n)));
    EXPECT_LT(std::sqrt(sum_fused / n), std::sqrt(sum_single / n));
    EXPECT_NEAR(std::sqrt(sum_single / n), 0.02 * std::sqrt(3.0), 0.002);
}

}  // namespace
}  // namespace einstall
