// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include "tessera/fed/client.hpp"

#include "tessera/io/io.hpp"

namespace tessera::fed {

WorkerClient::WorkerClient(std::string endpoint) : endpoint_(std::move(endpoint)), sock_(connect_to(endpoint_)) {}

Message WorkerClient::request(MsgType type, std::string payload) {
    std::lock_guard lock(mu_);
    const Message req{type, next_request_++, std::move(payload)};
    std::optional<Message> reply;
    try {
        const std::string frame = encode(req);
        sock_.send_all(frame);
        sent_[static_cast<std::size_t>(type)] += frame.size();
        reply = read_message(sock_);
    } catch (const FedError& e) {
        throw FedError("worker " + endpoint_ + ": " + e.what());
    }
    if (!reply) throw FedError("worker " + endpoint_ + " closed the connection");
    received_ += kHeaderSize + reply->payload.size();
    if (reply->request_id != req.request_id)
        throw FedError("worker " + endpoint_ + " answered request " + std::to_string(reply->request_id) +
                       " instead of " + std::to_string(req.request_id));
    if (reply->type == MsgType::Err) throw FedError("worker " + endpoint_ + ": " + reply->payload);
    if (reply->type != MsgType::Ok) throw FedError("worker " + endpoint_ + " sent an unexpected reply");
    return std::move(*reply);
}

std::uint64_t WorkerClient::put(const BasicTensorBlock& x) {
    return decode_var_id(request(MsgType::Put, io::encode_binary(x)).payload);
}

std::uint64_t WorkerClient::exec(const ExecRequest& req) {
    return decode_var_id(request(MsgType::Exec, req.encode()).payload);
}

BasicTensorBlock WorkerClient::get(std::uint64_t var) {
    return io::decode_binary(request(MsgType::Get, encode_var_id(var)).payload);
}

void WorkerClient::remove(std::uint64_t var) { request(MsgType::Remove, encode_var_id(var)); }

void WorkerClient::shutdown() { request(MsgType::Shutdown, {}); }

std::uint64_t WorkerClient::bytes_sent(MsgType type) const {
    std::lock_guard lock(mu_);
    return sent_[static_cast<std::size_t>(type)];
}

std::uint64_t WorkerClient::bytes_received() const {
    std::lock_guard lock(mu_);
    return received_;
}

} // namespace tessera::fed
