// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <mutex>
#include <string>

#include "tessera/core/tensor_block.hpp"
#include "tessera/fed/socket.hpp"
#include "tessera/fed/worker.hpp"

namespace tessera::fed {

/// Lockstep request/response connection to one worker.
class WorkerClient {
public:
    explicit WorkerClient(std::string endpoint);

    const std::string& endpoint() const noexcept { return endpoint_; }

    std::uint64_t put(const BasicTensorBlock& x);
    std::uint64_t exec(const ExecRequest& req);
    BasicTensorBlock get(std::uint64_t var);
    void remove(std::uint64_t var);
    void shutdown();

    /// Sends a request and returns the OK reply; throws FedError naming the
    /// endpoint on ERR or connection failure.
    Message request(MsgType type, std::string payload);

    /// Bytes sent (frame header included) per request type.
    std::uint64_t bytes_sent(MsgType type) const;
    std::uint64_t bytes_received() const;

private:
    std::string endpoint_;
    Socket sock_;
    mutable std::mutex mu_;
    std::uint64_t next_request_ = 1;
    std::array<std::uint64_t, 8> sent_{};
    std::uint64_t received_ = 0;
};

} // namespace tessera::fed
