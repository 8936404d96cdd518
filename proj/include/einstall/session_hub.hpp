// Copyright 2026 The einstall Authors
// SPDX-License-Identifier: Apache-2.0

// Transport-independent server core. One owner calls receive()/advance() sequentially; inputs
// are queued on arrival and applied in (arrival tick, arrival order) at the next tick boundary,
// then one FRAME is broadcast to every handshaken session. The engine clock only runs while at
// least one session is handshaken.

#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "einstall/content_capsule.hpp"
#include "einstall/motion_compression.hpp"
#include "einstall/protocol.hpp"
#include "einstall/reenactment_engine.hpp"

namespace einstall::protocol {

using SessionId = std::uint64_t;

struct HubConfig {
    EngineConfig engine;
    CompressionConfig compression;
    Workspace workspace;
    Pose virt_start{{0.0, 0.0, kEyeHeight}, 0.0};
    double handshake_timeout = 5.0;  // seconds
};

class SessionHub {
  public:
    using SendFn = std::function<void(SessionId, const std::string&)>;
    using CloseFn = std::function<void(SessionId)>;

    SessionHub(const SceneManifest& manifest, std::shared_ptr<const Capsule> capsule, HubConfig config, SendFn send,
               CloseFn close = {})
        : config_(std::move(config)),
          engine_(init_engine(manifest, std::move(capsule), config_.engine)),
          mapping_(reset_mapping(config_.workspace, config_.virt_start)),
          welcome_line_(encode_message(make_welcome(manifest, config_.engine.tick_rate))),
          send_(std::move(send)),
          close_(std::move(close)) {
        engine_ = handle_input(std::move(engine_), SetPose{mapping_.virt_pose});
    }

    SessionId connect(double now) {
        const SessionId id = next_id_++;
        Session s;
        s.connected_at = now;
        sessions_[id] = std::move(s);
        return id;
    }

    void disconnect(SessionId id) { sessions_.erase(id); }

    void receive(SessionId id, std::string_view line) {
        auto it = sessions_.find(id);
        if (it == sessions_.end()) return;
        Session& session = it->second;

        Message msg;
        try {
            msg = decode_message(line);
        } catch (const Error& e) {
            send_error(id, wire_code(e.code()), e.what());
            if (e.code() == ErrorCode::bad_version) close_session(id);
            return;
        }

        if (!session.handshaken) {
            if (const auto* hello = std::get_if<Hello>(&msg)) {
                session.handshaken = true;
                session.mode = hello->mode;
                session.client_name = hello->client_name;
                send_(id, welcome_line_);
            } else {
                send_error(id, "bad_input", "expected HELLO");
            }
            return;
        }

        std::optional<std::uint64_t> seq;
        if (const auto* p = std::get_if<PoseInput>(&msg)) seq = p->seq;
        if (const auto* s = std::get_if<SelectCityRequest>(&msg)) seq = s->seq;
        if (const auto* b = std::get_if<Bye>(&msg)) seq = b->seq;
        if (!seq) {
            send_error(id, "bad_input", "unexpected message after handshake");
            return;
        }
        if (session.last_seq_in && *seq <= *session.last_seq_in) {
            send_error(id, "bad_input", "seq must strictly increase");
            return;
        }
        session.last_seq_in = *seq;

        if (std::holds_alternative<Bye>(msg)) {
            close_session(id);
            return;
        }
        pending_.push_back({id, engine_.t_ticks, next_arrival_++, std::move(msg)});
    }

    /// Drops sessions that have not completed the handshake within the timeout.
    void expire_handshakes(double now) {
        std::vector<SessionId> expired;
        for (const auto& [id, s] : sessions_)
            if (!s.handshaken && now - s.connected_at >= config_.handshake_timeout) expired.push_back(id);
        for (SessionId id : expired) {
            send_error(id, "handshake_timeout", "no HELLO within " + std::to_string(config_.handshake_timeout) + " s");
            close_session(id);
        }
    }

    /// Applies queued inputs, ticks the engine and broadcasts the frame. Returns false (and does
    /// nothing) while no session is handshaken.
    bool advance() {
        if (active_sessions() == 0) return false;
        std::stable_sort(pending_.begin(), pending_.end(), [](const Pending& a, const Pending& b) {
            return std::tie(a.arrival_tick, a.arrival_order) < std::tie(b.arrival_tick, b.arrival_order);
        });
        for (const auto& p : pending_) apply(p);
        pending_.clear();

        auto [next, tick_frame] = tick(std::move(engine_));
        engine_ = std::move(next);
        const std::string line = encode_message(make_frame(tick_frame, mapping_snapshot(mapping_)));
        for (const auto& [id, s] : sessions_)
            if (s.handshaken) send_(id, line);
        return true;
    }

    [[nodiscard]] std::size_t active_sessions() const {
        return static_cast<std::size_t>(std::count_if(sessions_.begin(), sessions_.end(),
                                                      [](const auto& kv) { return kv.second.handshaken; }));
    }
    [[nodiscard]] std::size_t session_count() const { return sessions_.size(); }
    [[nodiscard]] std::size_t pending_inputs() const { return pending_.size(); }
    [[nodiscard]] const EngineState& engine() const { return engine_; }
    [[nodiscard]] const MappingState& mapping() const { return mapping_; }
    [[nodiscard]] const HubConfig& config() const { return config_; }

  private:
    struct Session {
        double connected_at = 0.0;
        bool handshaken = false;
        std::string mode;
        std::string client_name;
        std::optional<std::uint64_t> last_seq_in;
    };
    struct Pending {
        SessionId from;
        std::int64_t arrival_tick;
        std::uint64_t arrival_order;
        Message msg;
    };

    void apply(const Pending& p) {
        try {
            if (const auto* pose = std::get_if<PoseInput>(&p.msg)) {
                // Copies, not moves: a rejected input must leave state untouched.
                auto step = compress_step(mapping_, pose->move, config_.compression, config_.workspace);
                engine_ = handle_input(engine_, SetPose{step.mapping.virt_pose});
                mapping_ = step.mapping;
            } else if (const auto* sel = std::get_if<SelectCityRequest>(&p.msg)) {
                engine_ = handle_input(engine_, SelectCity{sel->city_id});
            }
        } catch (const Error& e) {
            send_error(p.from, wire_code(e.code()), e.what());
        }
    }

    void send_error(SessionId id, const std::string& code, const std::string& detail) {
        if (sessions_.count(id)) send_(id, encode_message(ErrorMsg{code, detail}));
    }

    void close_session(SessionId id) {
        sessions_.erase(id);
        if (close_) close_(id);
    }

    HubConfig config_;
    EngineState engine_;
    MappingState mapping_;
    std::string welcome_line_;
    SendFn send_;
    CloseFn close_;
    std::map<SessionId, Session> sessions_;
    std::vector<Pending> pending_;
    SessionId next_id_ = 1;
    std::uint64_t next_arrival_ = 0;
};

// --- scripted clients --------------------------------------------------------------------

/// One line a scripted client sends after the server has broadcast FRAME `after_tick`
/// (0 = right after connecting).
struct ClientScriptLine {
    std::int64_t after_tick = 0;
    std::string line;
};

/// Parses NDJSON lines of the form {"after_tick": k, "send": <message object>}.
inline std::vector<ClientScriptLine> parse_client_script(std::string_view text) {
    std::vector<ClientScriptLine> out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const Json doc = parse_json_text(line);
        ObjectReader r(doc, "line " + std::to_string(lineno), {"after_tick", "send"});
        const auto tick = r.integer("after_tick");
        if (!out.empty() && tick < out.back().after_tick)
            throw Error(ErrorCode::schema, r.child("after_tick") + ": must be non-decreasing");
        out.push_back({tick, r.at("send").dump() + "\n"});
    }
    return out;
}

/// Runs one scripted client against an in-process hub for `ticks` frames and returns every
/// line the server sent to it.
inline std::string record_transcript(const SceneManifest& manifest, std::shared_ptr<const Capsule> capsule,
                                     const HubConfig& config, const std::vector<ClientScriptLine>& script,
                                     std::int64_t ticks) {
    std::string transcript;
    SessionHub hub(manifest, std::move(capsule), config, [&](SessionId, const std::string& l) { transcript += l; });
    const SessionId client = hub.connect(0.0);
    std::size_t next = 0;
    auto deliver = [&](std::int64_t after) {
        while (next < script.size() && script[next].after_tick <= after) hub.receive(client, script[next++].line);
    };
    deliver(0);
    for (std::int64_t k = 1; k <= ticks; ++k) {
        if (!hub.advance()) break;
        deliver(k);
    }
    return transcript;
}

}  // namespace einstall::protocol
