// Copyright 2026 The einstall Authors
// SPDX-License-Identifier: Apache-2.0

// Network front end for SessionHub: NDJSON over TCP and the same JSON payloads as WebSocket
// text frames on /ws. Everything runs on one io_context thread, so socket reads, the tick timer
// and broadcasts are serialized and no client observes a half-applied tick.

#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <string>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "einstall/session_hub.hpp"

namespace einstall::net {

namespace asio = boost::asio;
namespace beast = boost::beast;
using tcp = asio::ip::tcp;

struct ServeOptions {
    std::string bind_address = "0.0.0.0";
    std::uint16_t tcp_port = 7777;
    std::uint16_t ws_port = 7778;
    std::size_t max_line = 64 * 1024;
};

class Connection {
  public:
    virtual ~Connection() = default;
    virtual void send(const std::string& line) = 0;
    virtual void close() = 0;
};

class Server {
  public:
    Server(asio::io_context& io, const SceneManifest& manifest, std::shared_ptr<const Capsule> capsule,
           protocol::HubConfig config, ServeOptions options)
        : io_(io),
          options_(std::move(options)),
          hub_(manifest, std::move(capsule), std::move(config),
               [this](protocol::SessionId id, const std::string& line) { deliver(id, line); },
               [this](protocol::SessionId id) { drop(id); }),
          tcp_acceptor_(io),
          ws_acceptor_(io),
          timer_(io),
          started_(std::chrono::steady_clock::now()) {}

    void start() {
        open(tcp_acceptor_, options_.tcp_port);
        open(ws_acceptor_, options_.ws_port);
        accept_tcp();
        accept_ws();
        next_tick_ = std::chrono::steady_clock::now();
        schedule_tick();
    }

    void stop() {
        beast::error_code ec;
        tcp_acceptor_.close(ec);
        ws_acceptor_.close(ec);
        timer_.cancel();
        auto conns = connections_;
        for (auto& [id, weak] : conns)
            if (auto c = weak.lock()) c->close();
        connections_.clear();
    }

    [[nodiscard]] std::uint16_t tcp_port() const { return tcp_acceptor_.local_endpoint().port(); }
    [[nodiscard]] std::uint16_t ws_port() const { return ws_acceptor_.local_endpoint().port(); }
    [[nodiscard]] const protocol::SessionHub& hub() const { return hub_; }

    // Called by connections.
    protocol::SessionId attach(const std::shared_ptr<Connection>& conn) {
        const auto id = hub_.connect(now());
        connections_[id] = conn;
        return id;
    }
    void on_line(protocol::SessionId id, std::string_view line) { hub_.receive(id, line); }
    void on_closed(protocol::SessionId id) {
        hub_.disconnect(id);
        connections_.erase(id);
    }
    [[nodiscard]] std::size_t max_line() const { return options_.max_line; }

  private:
    double now() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
    }

    void open(tcp::acceptor& acceptor, std::uint16_t port) {
        const tcp::endpoint ep(asio::ip::make_address(options_.bind_address), port);
        acceptor.open(ep.protocol());
        acceptor.set_option(asio::socket_base::reuse_address(true));
        acceptor.bind(ep);
        acceptor.listen();
    }

    void deliver(protocol::SessionId id, const std::string& line) {
        auto it = connections_.find(id);
        if (it == connections_.end()) return;
        if (auto c = it->second.lock()) c->send(line);
    }

    void drop(protocol::SessionId id) {
        auto it = connections_.find(id);
        if (it == connections_.end()) return;
        auto c = it->second.lock();
        connections_.erase(it);
        if (c) c->close();
    }

    void schedule_tick() {
        const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(1.0 / hub_.config().engine.tick_rate));
        next_tick_ += period;
        timer_.expires_at(next_tick_);
        timer_.async_wait([this](const beast::error_code& ec) {
            if (ec) return;
            hub_.expire_handshakes(now());
            hub_.advance();
            schedule_tick();
        });
    }

    void accept_tcp();
    void accept_ws();

    asio::io_context& io_;
    ServeOptions options_;
    protocol::SessionHub hub_;
    tcp::acceptor tcp_acceptor_;
    tcp::acceptor ws_acceptor_;
    asio::steady_timer timer_;
    std::chrono::steady_clock::time_point started_;
    std::chrono::steady_clock::time_point next_tick_;
    std::map<protocol::SessionId, std::weak_ptr<Connection>> connections_;
};

/// NDJSON over a raw TCP socket.
class TcpConnection : public Connection, public std::enable_shared_from_this<TcpConnection> {
  public:
    TcpConnection(tcp::socket socket, Server& server)
        : socket_(std::move(socket)), server_(server), buffer_(server.max_line()) {}

    void start() {
        id_ = server_.attach(shared_from_this());
        read();
    }

    void send(const std::string& line) override {
        if (closing_) return;
        queue_.push_back(line);
        if (queue_.size() == 1) write();
    }

    void close() override {
        if (closing_) return;
        closing_ = true;
        if (queue_.empty()) shutdown();
    }

  private:
    void read() {
        asio::async_read_until(socket_, buffer_, '\n', [self = shared_from_this()](beast::error_code ec, std::size_t n) {
            if (ec) {
                if (ec == asio::error::not_found) {
                    // Line longer than max_line; unrecoverable framing.
                    self->send(protocol::encode_message(protocol::ErrorMsg{"malformed", "line too long"}));
                    self->close();
                }
                self->finish();
                return;
            }
            std::string line(asio::buffers_begin(self->buffer_.data()),
                             asio::buffers_begin(self->buffer_.data()) + static_cast<std::ptrdiff_t>(n));
            self->buffer_.consume(n);
            if (line.find_first_not_of(" \t\r\n") != std::string::npos) self->server_.on_line(self->id_, line);
            if (!self->closing_) self->read();
        });
    }

    void write() {
        asio::async_write(socket_, asio::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->finish();
                return;
            }
            self->queue_.pop_front();
            if (!self->queue_.empty())
                self->write();
            else if (self->closing_)
                self->shutdown();
        });
    }

    void shutdown() {
        beast::error_code ec;
        socket_.shutdown(tcp::socket::shutdown_both, ec);
        socket_.close(ec);
        finish();
    }

    void finish() {
        if (finished_) return;
        finished_ = true;
        closing_ = true;
        server_.on_closed(id_);
    }

    tcp::socket socket_;
    Server& server_;
    asio::streambuf buffer_;
    std::deque<std::string> queue_;
    protocol::SessionId id_ = 0;
    bool closing_ = false;
    bool finished_ = false;
};

/// WebSocket on path /ws; each text frame carries one message without the trailing LF.
class WsConnection : public Connection, public std::enable_shared_from_this<WsConnection> {
  public:
    WsConnection(tcp::socket socket, Server& server) : ws_(std::move(socket)), server_(server) {}

    void start() {
        beast::http::async_read(ws_.next_layer(), buffer_, request_,
                                [self = shared_from_this()](beast::error_code ec, std::size_t) {
                                    if (ec) return;
                                    self->upgrade();
                                });
    }

    void send(const std::string& line) override {
        if (closing_ || !open_) return;
        std::string payload = line;
        if (!payload.empty() && payload.back() == '\n') payload.pop_back();
        queue_.push_back(std::move(payload));
        if (queue_.size() == 1) write();
    }

    void close() override {
        if (closing_) return;
        closing_ = true;
        if (queue_.empty()) shutdown();
    }

  private:
    void upgrade() {
        if (!beast::websocket::is_upgrade(request_) || request_.target() != "/ws") {
            auto res = std::make_shared<beast::http::response<beast::http::string_body>>(
                beast::http::status::not_found, request_.version());
            res->set(beast::http::field::content_type, "text/plain");
            res->body() = "websocket endpoint is /ws\n";
            res->prepare_payload();
            beast::http::async_write(ws_.next_layer(), *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
                beast::error_code ec;
                self->ws_.next_layer().shutdown(tcp::socket::shutdown_both, ec);
            });
            return;
        }
        ws_.read_message_max(server_.max_line());
        ws_.async_accept(request_, [self = shared_from_this()](beast::error_code ec) {
            if (ec) return;
            self->open_ = true;
            self->ws_.text(true);
            self->id_ = self->server_.attach(self);
            self->read();
        });
    }

    void read() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->finish();
                return;
            }
            std::string text = beast::buffers_to_string(self->buffer_.data());
            self->buffer_.consume(self->buffer_.size());
            self->server_.on_line(self->id_, text);
            if (!self->closing_) self->read();
        });
    }

    void write() {
        ws_.async_write(asio::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->finish();
                return;
            }
            self->queue_.pop_front();
            if (!self->queue_.empty())
                self->write();
            else if (self->closing_)
                self->shutdown();
        });
    }

    void shutdown() {
        ws_.async_close(beast::websocket::close_code::normal,
                        [self = shared_from_this()](beast::error_code) { self->finish(); });
    }

    void finish() {
        if (finished_) return;
        finished_ = true;
        closing_ = true;
        if (open_) server_.on_closed(id_);
    }

    beast::websocket::stream<tcp::socket> ws_;
    Server& server_;
    beast::flat_buffer buffer_;
    beast::http::request<beast::http::string_body> request_;
    std::deque<std::string> queue_;
    protocol::SessionId id_ = 0;
    bool open_ = false;
    bool closing_ = false;
    bool finished_ = false;
};

inline void Server::accept_tcp() {
    tcp_acceptor_.async_accept([this](beast::error_code ec, tcp::socket socket) {
        if (ec) return;
        std::make_shared<TcpConnection>(std::move(socket), *this)->start();
        accept_tcp();
    });
}

inline void Server::accept_ws() {
    ws_acceptor_.async_accept([this](beast::error_code ec, tcp::socket socket) {
        if (ec) return;
        std::make_shared<WsConnection>(std::move(socket), *this)->start();
        accept_ws();
    });
}

}  // namespace einstall::net
