// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "tessera/fed/protocol.hpp"

namespace tessera::fed {

/// Owning stream-socket handle.
class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    Socket(Socket&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
    Socket& operator=(Socket&& o) noexcept;
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;
    ~Socket();

    int fd() const noexcept { return fd_; }
    bool valid() const noexcept { return fd_ >= 0; }
    void send_all(std::string_view data) const;
    /// Reads exactly n bytes; returns false on orderly EOF before the first byte.
    bool recv_exact(char* dst, std::size_t n) const;
    /// Wakes blocked readers/acceptors on this socket.
    void shutdown() const noexcept;
    void close() noexcept;

private:
    int fd_ = -1;
};

/// Connects to "host:port"; throws FedError naming the endpoint.
Socket connect_to(const std::string& endpoint);

struct Endpoint {
    std::string host;
    std::uint16_t port;
};
Endpoint parse_endpoint(const std::string& endpoint);

/// Listening socket on all interfaces; port 0 picks an ephemeral port.
class Listener {
public:
    explicit Listener(std::uint16_t port);
    std::uint16_t port() const noexcept { return port_; }
    /// Blocks for the next connection; empty once the listener is shut down.
    std::optional<Socket> accept() const;
    void shutdown() const noexcept { sock_.shutdown(); }

private:
    Socket sock_;
    std::uint16_t port_ = 0;
};

void write_message(const Socket& s, const Message& m);
/// Empty on orderly EOF between frames.
std::optional<Message> read_message(const Socket& s);

} // namespace tessera::fed
