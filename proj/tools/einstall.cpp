// Copyright 2026 The einstall Authors
// SPDX-License-Identifier: Apache-2.0

#include <csignal>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "einstall/content_capsule.hpp"
#include "einstall/scene_model.hpp"
#include "einstall/server.hpp"
#include "einstall/sim_harness.hpp"
#include "einstall/tracking.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidationFailure = 1;
constexpr int kRuntimeError = 2;

using namespace einstall;

SceneManifest load_scene(const std::string& scene, const BuiltinOptions& opts = {}) {
    if (scene == "vf" || scene == "mc") return builtin_scene(scene, opts);
    return load_manifest(scene);
}

std::shared_ptr<const Capsule> load_capsule(const std::string& dir) {
    if (dir.empty()) return nullptr;
    return std::make_shared<const Capsule>(open_capsule(dir));
}

bool is_validation_error(ErrorCode code) {
    return code == ErrorCode::syntax || code == ErrorCode::schema || code == ErrorCode::dangling_reference;
}

int cmd_validate(const std::string& path) {
    const SceneManifest m = parse_manifest_structure(read_file(path));
    const auto violations = validate_manifest(m);
    for (const auto& v : violations) std::cout << v.path << ": " << v.message << "\n";
    if (!violations.empty()) return kValidationFailure;
    std::cout << "ok " << m.scene_id << ": " << m.nodes.size() << " nodes, " << m.count_nodes(NodeKind::media_surface)
              << " media surfaces, " << m.channels.size() << " channels, " << m.projectors.size() << " projectors, "
              << m.speakers.size() << " speakers, " << m.widgets.size() << " widgets\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"einstall: headless e-Installation engine"};
    app.require_subcommand(1);

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Validate a scene manifest");
    validate->add_option("manifest", validate_path, "Manifest JSON file")->required();

    std::string scene, capsule_dir, script_path, out_path, sensors_path;
    std::int64_t ticks = 300;
    std::uint64_t seed = 0;
    bool delay_emulation = false;
    double kappa_max = CompressionConfig{}.kappa_max;
    double steer_gain = CompressionConfig{}.steer_gain;
    auto* run = app.add_subcommand("run", "Run a deterministic scripted visit and write a trace");
    run->add_option("--scene", scene, "Manifest path, or vf / mc")->required();
    run->add_option("--capsule", capsule_dir, "Capsule directory");
    run->add_option("--script", script_path, "Walk script JSON")->required();
    run->add_option("--ticks", ticks, "Number of ticks")->required();
    run->add_option("--seed", seed, "Seed for sensor noise and playlist shuffles")->required();
    run->add_flag("--delay-emulation", delay_emulation, "Emulate the inter-circuit delay");
    run->add_option("--kappa-max", kappa_max, "Maximum injected curvature (1/m)");
    run->add_option("--steer-gain", steer_gain, "Center-seeking steering gain (1/m)");
    run->add_option("--sensors", sensors_path, "Sensor fixture JSON (default: built-in ring of 8)");
    run->add_option("--out", out_path, "Trace output (NDJSON)")->required();

    std::string metrics_path;
    auto* metrics = app.add_subcommand("metrics", "Compute metrics from a trace");
    metrics->add_option("trace", metrics_path, "Trace NDJSON file")->required();

    std::string serve_scene, serve_capsule, bind = "0.0.0.0";
    std::uint16_t tcp_port = 7777, ws_port = 7778;
    std::uint64_t serve_seed = 0;
    bool serve_delay = false;
    auto* serve = app.add_subcommand("serve", "Serve live sessions over TCP (NDJSON) and WebSocket");
    serve->add_option("--scene", serve_scene, "Manifest path, or vf / mc")->required();
    serve->add_option("--capsule", serve_capsule, "Capsule directory");
    serve->add_option("--tcp-port", tcp_port, "NDJSON port");
    serve->add_option("--ws-port", ws_port, "WebSocket port");
    serve->add_option("--bind", bind, "Bind address");
    serve->add_option("--seed", serve_seed, "Playlist shuffle seed");
    serve->add_flag("--delay-emulation", serve_delay, "Emulate the inter-circuit delay");
    serve->add_option("--kappa-max", kappa_max, "Maximum injected curvature (1/m)");
    serve->add_option("--steer-gain", steer_gain, "Center-seeking steering gain (1/m)");

    std::string ingest_src, ingest_out;
    auto* ingest = app.add_subcommand("ingest", "Snapshot a <city>/<slot>/<files> tree into a capsule");
    ingest->add_option("src", ingest_src, "Source directory")->required();
    ingest->add_option("--out", ingest_out, "Capsule directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kRuntimeError;
    }

    try {
        if (*validate) return cmd_validate(validate_path);

        if (*run) {
            HarnessConfig cfg;
            cfg.engine.delay_emulation = delay_emulation;
            cfg.engine.rng_seed = seed;
            cfg.compression.kappa_max = kappa_max;
            cfg.compression.steer_gain = steer_gain;
            cfg.ticks = ticks;
            if (!sensors_path.empty()) cfg.sensors = parse_sensors(read_file(sensors_path));
            const auto manifest = load_scene(scene);
            const auto script = parse_walk_script(read_file(script_path));
            const auto trace = run_scripted(manifest, load_capsule(capsule_dir), script, cfg, seed);
            write_trace(trace, out_path);
            std::cout << metrics_to_json(compute_metrics(trace)).dump(2) << "\n";
            return kOk;
        }

        if (*metrics) {
            std::cout << metrics_to_json(compute_metrics(read_trace(metrics_path))).dump(2) << "\n";
            return kOk;
        }

        if (*ingest) {
            const auto capsule = ingest_directory(ingest_src, ingest_out);
            std::cout << "ingested " << capsule.item_count() << " items in " << capsule.index.size()
                      << " (city, slot) pairs into " << ingest_out << "\n";
            return kOk;
        }

        if (*serve) {
            protocol::HubConfig cfg;
            cfg.engine.delay_emulation = serve_delay;
            cfg.engine.rng_seed = serve_seed;
            cfg.compression.kappa_max = kappa_max;
            cfg.compression.steer_gain = steer_gain;
            const auto manifest = load_scene(serve_scene);
            net::asio::io_context io;
            net::Server server(io, manifest, load_capsule(serve_capsule), cfg,
                               net::ServeOptions{bind, tcp_port, ws_port, 64 * 1024});
            server.start();
            net::asio::signal_set signals(io, SIGINT, SIGTERM);
            signals.async_wait([&](const boost::system::error_code&, int) {
                server.stop();
                io.stop();
            });
            std::cout << "serving " << manifest.scene_id << " on tcp:" << server.tcp_port()
                      << " ws:" << server.ws_port() << "/ws" << std::endl;
            io.run();
            return kOk;
        }
    } catch (const Error& e) {
        std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
        return is_validation_error(e.code()) ? kValidationFailure : kRuntimeError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
    return kRuntimeError;
}
