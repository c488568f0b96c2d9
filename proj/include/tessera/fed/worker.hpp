// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "tessera/fed/socket.hpp"

namespace tessera::fed {

/// EXEC payload: opcode line followed by one operand per line,
/// `v <var-id>` for worker variables or `s <text>` for literals.
struct ExecRequest {
    std::string opcode;
    struct Arg {
        bool is_var;
        std::uint64_t var;
        std::string text;
    };
    std::vector<Arg> args;

    std::string encode() const;
    static ExecRequest decode(std::string_view payload);
};

/// Serves federated requests. Each connection has its own variable
/// namespace; a SHUTDOWN message stops the whole worker.
class Worker {
public:
    explicit Worker(std::uint16_t port = 0);
    ~Worker();
    Worker(const Worker&) = delete;
    Worker& operator=(const Worker&) = delete;

    std::uint16_t port() const noexcept { return listener_.port(); }
    std::string endpoint() const { return "127.0.0.1:" + std::to_string(port()); }

    /// Accepts connections until stopped or shut down remotely.
    void serve();
    /// Runs serve() on a background thread.
    void start();
    void stop();

private:
    void handle(std::shared_ptr<Socket> conn);

    Listener listener_;
    std::atomic<bool> stopping_{false};
    std::mutex mu_;
    std::vector<std::shared_ptr<Socket>> conns_;
    std::vector<std::thread> threads_;
    std::thread background_;
};

} // namespace tessera::fed
